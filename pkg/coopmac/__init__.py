__version__ = "0.1.0"

from .dmc import DmcSpec, IBounds, InputDistribution, SlotSchedule, evaluate_bounds
from .gaussian import GaussianParams, PowerPolicy, compute_bounds
from .helper import read_dmc, read_frontier, write_frontier
from .optimizer import Frontier, RatePoint, SearchConfig, frontier, max_weighted_sum
from .polytope import RationalInequalitySystem, eliminate, implies, remove_redundant
from .run import run
