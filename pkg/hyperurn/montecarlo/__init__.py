from .normality import HZResult, hz_test
from .replications import MomentReport, ReplicationManager, SimulationPlan, estimate_moments, run_replications
