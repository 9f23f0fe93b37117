from .dense import DenseOutput, hermite, Trajectory, TrajectoryBuilder, dense_eval
from .rhs import rhs_pointwise, rhs_distributed
from .integrate import integrate, select_rhs

__all__ = (
    'DenseOutput',
    'hermite',
    'Trajectory',
    'TrajectoryBuilder',
    'dense_eval',
    'rhs_pointwise',
    'rhs_distributed',
    'integrate',
    'select_rhs'
)
