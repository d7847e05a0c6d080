"""Fourier transform, convolution and zero-sum counting on a finite abelian group.

Transform convention: forward transform F(gamma) = sum_x f(x) gamma(x) with no
normalization; inversion divides by N.  Power-of-two axes go through an exact
(+1/-1 butterfly) fast transform, other axes through numpy's FFT; the naive
O(N^2) kernel lives in the test suite as the independent oracle.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainMismatchError, ResourceBudgetError
from .groups import (
    GroupElement,
    GroupSpec,
    check_enumerable,
    neg_index,
    parse_element,
    translate_indices,
)

BRUTE_FORCE_BUDGET = 20_000_000


@dataclass(frozen=True)
class DenseFn:
    """Real-valued function on a group, indexed by canonical element order."""

    group: GroupSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.group.order,):
            raise DomainMismatchError(
                f"expected {self.group.order} values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise DomainMismatchError("function values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __call__(self, x: GroupElement | int) -> float:
        idx = x.index if isinstance(x, GroupElement) else int(x)
        return float(self.values[idx])

    def translate(self, x: GroupElement | int) -> "DenseFn":
        """The function n -> f(x + n)."""
        idx = x.index if isinstance(x, GroupElement) else int(x)
        return DenseFn(self.group, self.values[translate_indices(self.group, idx)])


@dataclass(frozen=True)
class Spectrum:
    """Complex transform values, indexed by canonical character order."""

    group: GroupSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != (self.group.order,):
            raise DomainMismatchError(
                f"expected {self.group.order} values, got shape {vals.shape}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def constant(group: GroupSpec, value: float) -> DenseFn:
    check_enumerable(group)
    return DenseFn(group, np.full(group.order, float(value)))


def indicator(group: GroupSpec, members: Iterable[GroupElement | int]) -> DenseFn:
    check_enumerable(group)
    vals = np.zeros(group.order)
    for x in members:
        vals[x.index if isinstance(x, GroupElement) else int(x)] = 1.0
    return DenseFn(group, vals)


def support(f: DenseFn) -> np.ndarray:
    """Indices where a 0/1-valued function is 1."""
    return np.flatnonzero(f.values > 0.5)


def delta(group: GroupSpec, x: GroupElement | int = 0) -> DenseFn:
    return indicator(group, [x])


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------

def _axis_transform(a: np.ndarray, axis: int, m: int, inverse: bool) -> np.ndarray:
    if m == 1:
        return a
    if m == 2:
        lo = np.take(a, 0, axis=axis)
        hi = np.take(a, 1, axis=axis)
        out = np.stack([lo + hi, lo - hi], axis=axis)
        return out * 0.5 if inverse else out
    if inverse:
        return np.fft.fft(a, axis=axis) / m
    return np.fft.ifft(a, axis=axis) * m


def _transform(group: GroupSpec, values: np.ndarray, inverse: bool) -> np.ndarray:
    lead = values.shape[:-1]
    a = values.astype(np.complex128).reshape(lead + group.factors)
    for j, m in enumerate(group.factors):
        a = _axis_transform(a, axis=len(lead) + j, m=m, inverse=inverse)
    return a.reshape(lead + (group.order,))


def dft(f: DenseFn) -> Spectrum:
    """Forward transform F(gamma) = sum_x f(x) gamma(x)."""
    check_enumerable(f.group)
    return Spectrum(f.group, _transform(f.group, f.values, inverse=False))


def idft(F: Spectrum, return_residue: bool = False):
    """Inverse transform f(x) = N^{-1} sum_gamma F(gamma) conj(gamma(x)).

    Returns the real part; with return_residue=True also reports the largest
    imaginary component left over (nonzero when F lacks conjugate symmetry).
    """
    out = _transform(F.group, F.values, inverse=True)
    residue = float(np.max(np.abs(out.imag))) if out.size else 0.0
    f = DenseFn(F.group, out.real.copy())
    if return_residue:
        return f, residue
    return f


def dft_many(group: GroupSpec, rows: np.ndarray) -> np.ndarray:
    """Forward transform applied to each row of a (B, N) array."""
    return _transform(group, np.asarray(rows), inverse=False)


def parseval_gap(f: DenseFn, F: Spectrum | None = None) -> float:
    """Relative gap in sum |F|^2 = N sum f^2 (zero in exact arithmetic)."""
    if F is None:
        F = dft(f)
    lhs = float(np.sum(np.abs(F.values) ** 2))
    rhs = f.group.order * float(np.sum(f.values**2))
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return abs(lhs - rhs) / scale


# ---------------------------------------------------------------------------
# convolution and the zero-sum operator
# ---------------------------------------------------------------------------

def convolve(f: DenseFn, g: DenseFn) -> DenseFn:
    """(f * g)(x) = sum_y f(y) g(x - y), computed spectrally."""
    if f.group != g.group:
        raise DomainMismatchError("convolution operands on different groups")
    prod = Spectrum(f.group, dft(f).values * dft(g).values)
    return idft(prod)


def zero_sum_count(fs: Sequence[DenseFn]) -> float:
    """T(f_1, ..., f_k) = sum over x_1 + ... + x_k = 0 of the product.

    Computed spectrally as N^{-1} sum_gamma prod_i F_i(gamma).
    """
    if len(fs) < 2:
        raise DomainMismatchError("zero-sum operator needs at least two functions")
    group = fs[0].group
    for f in fs[1:]:
        if f.group != group:
            raise DomainMismatchError("zero-sum operands on different groups")
    acc = np.ones(group.order, dtype=np.complex128)
    for f in fs:
        acc *= dft(f).values
    return float(np.sum(acc).real) / group.order


def brute_force_zero_sum(fs: Sequence[DenseFn], budget: int = BRUTE_FORCE_BUDGET) -> float:
    """The literal nested sum behind T(f_1, ..., f_k); O(N^{k-1}) work.

    The innermost free coordinate is vectorized; the summand is unchanged.
    """
    if len(fs) < 2:
        raise DomainMismatchError("zero-sum operator needs at least two functions")
    group = fs[0].group
    for f in fs[1:]:
        if f.group != group:
            raise DomainMismatchError("zero-sum operands on different groups")
    k = len(fs)
    n = group.order
    if n ** (k - 1) > budget:
        raise ResourceBudgetError(
            f"brute-force zero-sum needs N^(k-1) = {n ** (k - 1)} > budget {budget}"
        )
    neg = neg_index(group)
    vals = [f.values for f in fs]
    if k == 2:
        return float(vals[0] @ vals[1][neg])
    second_last, last = vals[-2], vals[-1]

    def descend(depth: int, s_idx: int, weight: float) -> float:
        if depth == k - 2:
            row = translate_indices(group, s_idx)
            return weight * float(second_last @ last[neg[row]])
        total = 0.0
        fv = vals[depth]
        row = translate_indices(group, s_idx)
        for x in range(n):
            w = fv[x]
            if w == 0.0:
                continue
            total += descend(depth + 1, int(row[x]), weight * w)
        return total

    return descend(0, 0, 1.0)


# ---------------------------------------------------------------------------
# serialization (CSV for functions, one element per line for sets)
# ---------------------------------------------------------------------------

def save_dense_fn(f: DenseFn, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["element", "value"])
        for i, v in enumerate(f.values):
            writer.writerow([str(f.group.element_at(i)), repr(float(v))])


def load_dense_fn(group: GroupSpec, path) -> DenseFn:
    vals = np.zeros(group.order)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["element", "value"]:
            raise DomainMismatchError(f"{path}: expected CSV header 'element,value'")
        for row in reader:
            if not row:
                continue
            x = parse_element(group, row[0])
            vals[x.index] = float(row[1])
    return DenseFn(group, vals)


def save_set(group: GroupSpec, members: Iterable[GroupElement | int], path) -> None:
    with open(path, "w") as fh:
        for x in members:
            elem = x if isinstance(x, GroupElement) else group.element_at(int(x))
            fh.write(f"{elem}\n")


def load_set(group: GroupSpec, path) -> list[GroupElement]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(parse_element(group, line))
    return out
