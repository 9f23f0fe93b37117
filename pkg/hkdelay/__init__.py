from hkdelay.model import Scenario
from hkdelay.solver import Trajectory, integrate, dense_eval
from hkdelay.analysis import build_certificate, certificate_constants
from hkdelay.cli import main, run

__all__ = (
    'Scenario',
    'Trajectory',
    'integrate',
    'dense_eval',
    'build_certificate',
    'certificate_constants',
    'main',
    'run'
)
