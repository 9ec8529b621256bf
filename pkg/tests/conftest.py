import numpy as np
import pytest

from boxhash import Box, Detections


@pytest.fixture
def crowd_trio():
    """Three same-size boxes in a row: the first overlaps the second heavily,
    the second overlaps the third heavily, the first and third only weakly."""
    boxes = np.array(
        [
            [100.0, 100.0, 54.1, 50.0],
            [100.0, 100.0, 79.1, 50.0],
            [100.0, 100.0, 96.1, 50.0],
        ]
    )
    return Detections(boxes, np.array([0.9, 0.8, 0.7]))


@pytest.fixture
def trio_boxes(crowd_trio):
    return [Box(*row) for row in crowd_trio.boxes]


def random_detections(rng, n, span=500.0):
    """Valid random detections with sizes in [1, 120] and distinct-ish scores."""
    boxes = np.stack(
        [
            rng.uniform(1.0, 120.0, n),
            rng.uniform(1.0, 120.0, n),
            rng.uniform(-span, span, n),
            rng.uniform(-span, span, n),
        ],
        axis=1,
    )
    return Detections(boxes, rng.uniform(0.0, 1.0, n))
