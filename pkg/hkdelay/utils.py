import numpy as np
from scipy.spatial import ConvexHull, QhullError

__all__ = (
    'reduce_cloud',
    'max_pairwise_distance',
    'format_time',
    'format_value'
)

# Rows per block of the brute force distance scan
_CHUNK = 256


def reduce_cloud(points: np.ndarray) -> np.ndarray:
    """Drops points that cannot be an endpoint of the cloud diameter.

    The diameter of a finite set is attained between two vertices of its
    convex hull, so only those are kept. One-dimensional clouds reduce to
    their two extremes, clouds in more than three dimensions are returned
    unchanged.

    :param points: Point cloud of shape ``(n, d)``.
    :type points: np.ndarray
    :return: Subset of the rows of ``points`` with the same diameter.
    :rtype: np.ndarray
    """
    points = np.asarray(points, dtype=float)

    if points.shape[0] <= 2:
        return points

    if points.shape[1] == 1:
        return points[[np.argmin(points[:, 0]), np.argmax(points[:, 0])]]

    points = np.unique(points, axis=0)

    if points.shape[1] > 3 or points.shape[0] <= points.shape[1] + 1:
        return points

    for options in (None, 'QJ'):
        try:
            return points[ConvexHull(points, qhull_options=options).vertices]
        except (QhullError, ValueError):
            continue

    return points


def max_pairwise_distance(points: np.ndarray) -> float:
    """Returns the largest Euclidean distance between two rows of ``points``.

    :param points: Point cloud of shape ``(n, d)``.
    :type points: np.ndarray
    :return: Diameter of the cloud, ``0`` for a single point.
    :rtype: float
    """
    reduced = reduce_cloud(points)
    best = 0.0

    for start in range(0, reduced.shape[0], _CHUNK):
        block = reduced[start:start + _CHUNK]
        distances = np.linalg.norm(
            block[:, None, :] - reduced[None, :, :],
            axis=-1
        )
        best = max(best, float(distances.max(initial=0.0)))

    return best


def format_time(value: float) -> str:
    """Fixed-point time with 9 fractional digits (join key across files)."""
    return f'{value:.9f}'


def format_value(value: float) -> str:
    """Shortest decimal that round-trips to the same double."""
    return repr(float(value))
