"""Community energy management with fast-frequency-response reserves.

Subpackages: :mod:`cems.lpcore` (LP/MILP solver), :mod:`cems.model` (MILP
formulation), :mod:`cems.control` (the three control levels and the plant),
:mod:`cems.io` (config, manifests, reports).  :mod:`cems.scenario` generates
PV scenarios and :mod:`cems.datasets` ships synthetic test communities.
"""

__version__ = "0.1.0"
