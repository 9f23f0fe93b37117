"""Writers for every artifact a run produces.

Data files carry no timestamps: grid times use fixed 9-digit decimals, all
other numbers the shortest round-trip decimal.
"""

import csv
from pathlib import Path

import numpy as np
from loguru import logger

from hkdelay.analysis import diameter_series
from hkdelay.schemas import ConsensusCertificate, MeanFieldReport, SweepRow
from hkdelay.solver import Trajectory
from hkdelay.utils import format_time, format_value

__all__ = (
    'write_trajectory_csv',
    'write_certificate_report',
    'write_metrics_csv',
    'write_sweep_csv',
    'write_meanfield_csv',
    'write_meanfield_report',
    'write_decay_svg'
)

# Plot geometry in pixels
_WIDTH = 640
_HEIGHT = 400
_PAD = 48


def _optional(value: float | None) -> str:
    return '' if value is None else format_value(value)


def _open_csv(path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    return path.open('w', newline='', encoding='utf-8')


def write_trajectory_csv(traj: Trajectory, path: Path) -> Path:
    """Writes ``t,agent,x0,...`` with one row per grid time and agent."""
    with _open_csv(path) as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(
            ['t', 'agent', *(f'x{k}' for k in range(traj.dimension))]
        )

        for t, state in zip(traj.grid, traj.states):
            for agent, opinion in enumerate(state):
                writer.writerow(
                    [format_time(t), agent, *map(format_value, opinion)]
                )

    logger.info(f'Trajectory written to {path}')
    return path


def write_certificate_report(cert: ConsensusCertificate, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(cert.model_dump_json(indent=2) + '\n', encoding='utf-8')

    logger.info(f'Certificate written to {path}')
    return path


def write_metrics_csv(
        traj: Trajectory,
        cert: ConsensusCertificate,
        path: Path
) -> Path:
    """Writes ``t,d_t,bound_t`` with the decay bound of the certificate."""
    diameters = diameter_series(traj)
    bound = cert.D0 * np.exp(-cert.gamma * (traj.grid - 2 * cert.tau_bar))

    with _open_csv(path) as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['t', 'd_t', 'bound_t'])
        writer.writerows(
            [format_time(t), format_value(d), format_value(b)]
            for t, d, b in zip(traj.grid, diameters, bound)
        )

    logger.info(f'Metrics written to {path}')
    return path


def write_sweep_csv(rows: list[SweepRow], parameter: str, path: Path) -> Path:
    with _open_csv(path) as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(
            [parameter, 'C', 'C_tilde', 'gamma', 'empirical_rate', 'passed',
             'error']
        )
        writer.writerows(
            [
                format_value(row.value),
                _optional(row.C),
                _optional(row.C_tilde),
                _optional(row.gamma),
                _optional(row.empirical_rate),
                str(row.passed).lower(),
                row.error or ''
            ]
            for row in rows
        )

    logger.info(f'Sweep summary written to {path}')
    return path


def write_meanfield_csv(report: MeanFieldReport, path: Path) -> Path:
    with _open_csv(path) as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['N', 't', 'dX', 'bound', 'margin'])
        writer.writerows(
            [
                row.N,
                format_time(row.t),
                format_value(row.dX),
                format_value(row.bound),
                format_value(row.margin)
            ]
            for row in report.rows
        )

    logger.info(f'Mean-field rows written to {path}')
    return path


def write_meanfield_report(report: MeanFieldReport, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        report.model_dump_json(indent=2, exclude={'rows'}) + '\n',
        encoding='utf-8'
    )

    logger.info(f'Mean-field report written to {path}')
    return path


def _scale(values: np.ndarray, low: float, high: float, size: float,
           flip: bool = False) -> np.ndarray:
    span = high - low if high > low else 1.0
    scaled = (values - low) / span * (size - 2 * _PAD) + _PAD
    return size - scaled if flip else scaled


def _polyline(xs: np.ndarray, ys: np.ndarray, colour: str) -> str:
    points = ' '.join(f'{x:.2f},{y:.2f}' for x, y in zip(xs, ys))
    return (
        f'  <polyline fill="none" stroke="{colour}" stroke-width="1.5" '
        f'points="{points}"/>'
    )


def write_decay_svg(
        traj: Trajectory,
        cert: ConsensusCertificate,
        path: Path
) -> Path:
    """Static chart of ``ln d(t)`` against the certified bound line.

    Times where the diameter vanishes are left out of the ``ln d`` curve.
    """
    times = traj.grid
    diameters = diameter_series(traj)
    positive = diameters > 0

    log_d = np.log(diameters[positive])
    if cert.D0 > 0:
        log_bound = np.log(cert.D0) - cert.gamma * (times - 2 * cert.tau_bar)
    else:
        log_bound = np.empty(0)

    values = np.concatenate([log_d, log_bound])
    if not values.size:
        values = np.zeros(1)
    low, high = float(values.min()), float(values.max())
    t_low, t_high = float(times[0]), float(times[-1])

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'  <rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'  <line x1="{_PAD}" y1="{_HEIGHT - _PAD}" x2="{_WIDTH - _PAD}" '
        f'y2="{_HEIGHT - _PAD}" stroke="black"/>',
        f'  <line x1="{_PAD}" y1="{_PAD}" x2="{_PAD}" y2="{_HEIGHT - _PAD}" '
        f'stroke="black"/>',
        f'  <text x="{_WIDTH / 2:.0f}" y="{_HEIGHT - 12}" '
        f'text-anchor="middle" font-size="12">t in [{t_low:g}, {t_high:g}]'
        f'</text>',
        f'  <text x="12" y="{_PAD - 16}" font-size="12">ln d(t) in '
        f'[{low:.3g}, {high:.3g}]; dashed: ln D0 - gamma (t - 2 tau_bar), '
        f'gamma={cert.gamma:.4g}</text>'
    ]

    if log_bound.size:
        xs = _scale(times, t_low, t_high, _WIDTH)
        ys = _scale(log_bound, low, high, _HEIGHT, flip=True)
        lines.append(
            _polyline(xs, ys, '#c0392b').replace('/>', ' stroke-dasharray="6 4"/>')
        )
    if positive.any():
        xs = _scale(times[positive], t_low, t_high, _WIDTH)
        ys = _scale(log_d, low, high, _HEIGHT, flip=True)
        lines.append(_polyline(xs, ys, '#2c3e50'))

    lines.append('</svg>')

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')

    logger.info(f'Plot written to {path}')
    return path
