"""Tests for lib/metrics.py."""

import numpy as np

from stellar_loc.lib.errors import UnknownReferencePointError
from stellar_loc.lib.metrics import label_errors, localization_error, rp_coordinates
from stellar_loc.lib.result import Err, Ok
from stellar_loc.models import ReferencePoint

RPS = (
    ReferencePoint("rp-0", 0.0, 0.0),
    ReferencePoint("rp-1", 3.0, 4.0),
    ReferencePoint("rp-2", 6.0, 0.0),
)


class TestLocalizationError:
    def test_distance(self) -> None:
        assert localization_error("rp-1", "rp-0", RPS) == Ok(5.0)

    def test_correct_prediction_is_zero(self) -> None:
        assert localization_error("rp-2", "rp-2", RPS) == Ok(0.0)

    def test_unknown_rp(self) -> None:
        assert localization_error("rp-9", "rp-0", RPS) == Err(UnknownReferencePointError("rp-9"))


class TestLabelErrors:
    def test_coordinates_table(self) -> None:
        assert rp_coordinates(RPS).tolist() == [[0.0, 0.0], [3.0, 4.0], [6.0, 0.0]]

    def test_empty_building(self) -> None:
        assert rp_coordinates(()).shape == (0, 2)

    def test_per_sample(self) -> None:
        errors = label_errors(np.array([1, 2, 0]), np.array([0, 1, 0]), rp_coordinates(RPS))
        assert errors.tolist() == [5.0, 5.0, 0.0]
