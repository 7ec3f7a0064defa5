"""Closed interval arithmetic on arrays of bounds.

Endpoints may be infinite. Inside corner products ``±inf * 0`` is taken as 0,
and division by an interval containing 0 yields ``(-inf, inf)``.
"""

from dataclasses import dataclass

import numpy as np

from exceptions import InvalidArgumentError, InvalidIntervalError, PropagationError


@dataclass(frozen=True, eq=False)
class BoundsArray:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo, hi = np.broadcast_arrays(np.asarray(self.lo, dtype=float), np.asarray(self.hi, dtype=float))
        if np.isnan(lo).any() or np.isnan(hi).any():
            raise InvalidIntervalError("Interval endpoints must not be NaN")
        if (lo > hi).any():
            index = tuple(int(i) for i in np.argwhere(lo > hi)[0])
            raise InvalidIntervalError(f"Lower bound exceeds upper bound at index {index}")
        object.__setattr__(self, "lo", lo.copy())
        object.__setattr__(self, "hi", hi.copy())

    @classmethod
    def point(cls, value) -> "BoundsArray":
        return cls(value, value)

    @classmethod
    def unbounded(cls, shape=()) -> "BoundsArray":
        return cls(np.full(shape, -np.inf), np.full(shape, np.inf))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.lo.shape

    @property
    def width(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return self.hi - self.lo

    def contains(self, value) -> np.ndarray:
        value = np.asarray(value, dtype=float)
        return (self.lo <= value) & (value <= self.hi)

    def __getitem__(self, index) -> "BoundsArray":
        return BoundsArray(self.lo[index], self.hi[index])

    def __eq__(self, other) -> bool:
        if not isinstance(other, BoundsArray):
            return NotImplemented
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)

    def __repr__(self) -> str:
        return f"BoundsArray(lo={self.lo!r}, hi={self.hi!r})"


def as_bounds(value) -> BoundsArray:
    """Accept a ``BoundsArray``, a ``(lo, hi)`` pair or a point value."""
    if isinstance(value, BoundsArray):
        return value
    if isinstance(value, tuple) and len(value) == 2:
        return BoundsArray(*value)
    return BoundsArray.point(value)


def _product(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        return np.where((x == 0) | (y == 0), 0.0, x * y)


def _hull(corners: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    stacked = np.stack(np.broadcast_arrays(*corners))
    finite = ~np.isnan(stacked)
    lo = np.where(finite, stacked, np.inf).min(axis=0)
    hi = np.where(finite, stacked, -np.inf).max(axis=0)
    # every corner undefined: nothing is known about the result
    empty = ~finite.any(axis=0)
    return np.where(empty, -np.inf, lo), np.where(empty, np.inf, hi)


def iv_add(a, b) -> BoundsArray:
    a, b = as_bounds(a), as_bounds(b)
    with np.errstate(invalid="ignore"):
        lo, hi = a.lo + b.lo, a.hi + b.hi
    return BoundsArray(np.nan_to_num(lo, nan=-np.inf), np.nan_to_num(hi, nan=np.inf))


def iv_sub(a, b) -> BoundsArray:
    a, b = as_bounds(a), as_bounds(b)
    with np.errstate(invalid="ignore"):
        lo, hi = a.lo - b.hi, a.hi - b.lo
    return BoundsArray(np.nan_to_num(lo, nan=-np.inf), np.nan_to_num(hi, nan=np.inf))


def iv_min(a, b) -> BoundsArray:
    a, b = as_bounds(a), as_bounds(b)
    return BoundsArray(np.minimum(a.lo, b.lo), np.minimum(a.hi, b.hi))


def iv_max(a, b) -> BoundsArray:
    a, b = as_bounds(a), as_bounds(b)
    return BoundsArray(np.maximum(a.lo, b.lo), np.maximum(a.hi, b.hi))


def iv_mul(a, b) -> BoundsArray:
    a, b = as_bounds(a), as_bounds(b)
    corners = [_product(a.lo, b.lo), _product(a.lo, b.hi), _product(a.hi, b.lo), _product(a.hi, b.hi)]
    return BoundsArray(*_hull(corners))


def iv_div(a, b) -> BoundsArray:
    a, b = as_bounds(a), as_bounds(b)
    with np.errstate(divide="ignore", invalid="ignore"):
        corners = [a.lo / b.lo, a.hi / b.lo, a.lo / b.hi, a.hi / b.hi]
    lo, hi = _hull(corners)
    straddles = (b.lo <= 0) & (b.hi >= 0)
    return BoundsArray(np.where(straddles, -np.inf, lo), np.where(straddles, np.inf, hi))


def iv_square(a) -> BoundsArray:
    """Tight square; unlike ``iv_mul(a, a)`` it never goes below zero."""
    a = as_bounds(a)
    lo_sq, hi_sq = a.lo**2, a.hi**2
    straddles = (a.lo <= 0) & (a.hi >= 0)
    return BoundsArray(np.where(straddles, 0.0, np.minimum(lo_sq, hi_sq)), np.maximum(lo_sq, hi_sq))


def iv_clip(a, lo: float, hi: float) -> BoundsArray:
    if lo > hi:
        raise InvalidArgumentError(f"Clip range is empty: [{lo}, {hi}]")
    a = as_bounds(a)
    return BoundsArray(np.clip(a.lo, lo, hi), np.clip(a.hi, lo, hi))


def apply_bound_pair(cminus, cplus, mu_bounds: BoundsArray, qoi_shape=None) -> BoundsArray:
    """Propagate mean bounds through user supplied ``C-`` and ``C+``."""
    lo = np.asarray(cminus(mu_bounds.lo.copy(), mu_bounds.hi.copy()), dtype=float)
    hi = np.asarray(cplus(mu_bounds.lo.copy(), mu_bounds.hi.copy()), dtype=float)
    expected = lo.shape if qoi_shape is None else tuple(qoi_shape)
    for name, values in (("C-", lo), ("C+", hi)):
        if values.shape != expected:
            raise PropagationError(f"{name} returned shape {values.shape}, expected {expected}")
        if np.isnan(values).any():
            index = tuple(int(i) for i in np.argwhere(np.isnan(values))[0])
            raise PropagationError(f"{name} returned NaN for QOI index {index}", qoi_index=index)
    if (lo > hi).any():
        index = tuple(int(i) for i in np.argwhere(lo > hi)[0])
        raise PropagationError(
            f"C- exceeds C+ for QOI index {index}: {lo[index]} > {hi[index]}",
            qoi_index=index,
        )
    return BoundsArray(lo, hi)
