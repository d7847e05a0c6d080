"""Exact regularity pipeline on (Z/2)^n.

Subgroup-local Fourier analysis runs on the subgroup's own coordinates: a
translated restriction A_H^{+g} becomes a vector of length |H| indexed by
basis coefficients, and its transform is an exact Walsh-Hadamard transform.
Irregular cosets contribute witness characters whose annihilator refines the
subgroup, increasing the mean-square coset density ("index") by at least
eps^3 per step, which forces termination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainMismatchError, InternalCheckError
from .groups import F2Subgroup, GroupElement, GroupSpec, f2_full, f2_nullspace
from .harmonic import DenseFn, Spectrum, support, zero_sum_count


def _require_f2(group: GroupSpec) -> int:
    if not group.is_f2:
        raise DomainMismatchError(f"operation requires (Z/2)^n, got {group}")
    return group.rank


def _as_mask(g: GroupElement | int) -> int:
    return g.index if isinstance(g, GroupElement) else int(g)


def wht_last_axis(mat: np.ndarray) -> np.ndarray:
    """Walsh-Hadamard transform along the last axis (length a power of two).

    Exact for integer-valued input: the butterflies only add and subtract.
    """
    out = np.array(mat, dtype=np.float64, copy=True)
    n = out.shape[-1]
    h = 1
    while h < n:
        view = out.reshape(out.shape[:-1] + (n // (2 * h), 2, h))
        lo = view[..., 0, :].copy()
        hi = view[..., 1, :]
        view[..., 0, :] = lo + hi
        view[..., 1, :] = lo - hi
        h *= 2
    return out


def local_values(f: DenseFn, H: F2Subgroup, g: GroupElement | int) -> np.ndarray:
    """f(g + h_t) over H in coefficient order t."""
    _require_f2(f.group)
    return f.values[H.elements_by_coeff() ^ _as_mask(g)]


def local_fourier(f: DenseFn, H: F2Subgroup, g: GroupElement | int) -> Spectrum:
    """Transform of the translated restriction on the subgroup's own dual.

    Entry u is sum over t of f(g + h_t) (-1)^{<t, u>}; entry 0 is the mass of
    f on the coset H + g (= |A ∩ (H+g)| for an indicator).
    """
    sub = GroupSpec((2,) * H.dim)
    return Spectrum(sub, wht_last_axis(local_values(f, H, g)))


def _coset_spectra(f: DenseFn, H: F2Subgroup) -> tuple[np.ndarray, np.ndarray]:
    """(coset reps, per-coset local spectra) for all cosets at once."""
    reps = H.coset_reps()
    helts = H.elements_by_coeff()
    rows = f.values[np.bitwise_xor.outer(reps, helts)]
    return reps, wht_last_axis(rows)


def _sup_nontrivial(spectra: np.ndarray) -> np.ndarray:
    if spectra.shape[-1] == 1:
        return np.zeros(spectra.shape[:-1])
    return np.max(np.abs(spectra[..., 1:]), axis=-1)


def is_regular_value_f2(f: DenseFn, H: F2Subgroup, g: GroupElement | int, eps: float) -> bool:
    """True iff every nontrivial local coefficient has modulus <= eps |H|."""
    spec = wht_last_axis(local_values(f, H, g))
    return bool(_sup_nontrivial(spec[None, :])[0] <= eps * H.size)


def is_regular_subgroup_f2(f: DenseFn, H: F2Subgroup, eps: float) -> tuple[bool, int]:
    """Count values g failing regularity; the subgroup passes iff count < eps N.

    Regularity of g depends only on its coset (translates share coefficient
    moduli), so the count is coset count times |H|.
    """
    _, spectra = _coset_spectra(f, H)
    irregular_cosets = int(np.count_nonzero(_sup_nontrivial(spectra) > eps * H.size))
    count = irregular_cosets * H.size
    return count < eps * f.group.order, count


def index_f2(f: DenseFn, H: F2Subgroup) -> float:
    """Mean squared coset density (1/N) sum_g (mass of f on H+g / |H|)^2."""
    _, spectra = _coset_spectra(f, H)
    masses = spectra[:, 0]
    return float(np.sum(masses**2)) / (f.group.order * H.size)


def _witnesses(f: DenseFn, H: F2Subgroup, eps: float) -> list[int]:
    """Lifted witness characters from irregular cosets, strongest first.

    Per irregular coset the nontrivial coefficient of maximum modulus wins
    (ties to the least label); at most max(1, #cosets/2) cosets contribute,
    kept in decreasing order of their top coefficient.
    """
    reps, spectra = _coset_spectra(f, H)
    sup = _sup_nontrivial(spectra)
    threshold = eps * H.size
    irregular = np.flatnonzero(sup > threshold)
    if irregular.size == 0:
        raise DomainMismatchError("refinement requires an irregular subgroup")
    order = np.lexsort((reps[irregular], -sup[irregular]))
    cap = max(1, reps.size // 2)
    chosen = irregular[order][:cap]

    pivots = H.pivots
    lifted: list[int] = []
    for c in chosen:
        mags = np.abs(spectra[c])
        mags[0] = -1.0
        best = np.flatnonzero(mags == mags.max())[0]
        mask = 0
        for j, p in enumerate(pivots):
            if (best >> j) & 1:
                mask |= 1 << p
        if mask not in lifted:
            lifted.append(mask)
    return lifted


def refine_step_f2(f: DenseFn, H: F2Subgroup, eps: float) -> F2Subgroup:
    """Refine an irregular subgroup; the index gain of at least eps^3 is asserted."""
    n = _require_f2(f.group)
    regular, _ = is_regular_subgroup_f2(f, H, eps)
    if regular:
        raise DomainMismatchError("refine_step_f2 called on a regular subgroup")
    lifted = _witnesses(f, H, eps)
    refined = f2_nullspace(H.annihilator().basis + tuple(lifted), n)
    gain = index_f2(f, refined) - index_f2(f, H)
    if gain < eps**3 - 1e-9:
        raise InternalCheckError(
            f"index gain {gain} fell short of eps^3 = {eps**3}"
        )
    return refined


@dataclass
class F2RegReport:
    subgroup: F2Subgroup
    epsilon: float
    irregular_values: int
    index_trace: list[float]
    iterations: int
    dims: list[int] = field(default_factory=list)
    irregular_counts: list[int] = field(default_factory=list)
    witnesses: list[list[int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "eps": self.epsilon,
            "dims": self.dims,
            "index_trace": self.index_trace,
            "irregular_counts": self.irregular_counts,
            "witnesses": self.witnesses,
            "iterations": self.iterations,
            "final_irregular_values": self.irregular_values,
        }


def regularize_f2(f: DenseFn, eps: float) -> F2RegReport:
    """Iterate refinement until the subgroup is eps-regular for f.

    Each step gains at least eps^3 of index, so at most floor(eps^-3) steps run.
    """
    n = _require_f2(f.group)
    if not 0.0 < eps < 0.5:
        raise DomainMismatchError("eps must lie in (0, 1/2)")
    H = f2_full(n)
    trace = [index_f2(f, H)]
    dims = [H.dim]
    counts: list[int] = []
    witnesses: list[list[int]] = []
    max_steps = math.floor(eps**-3)
    iterations = 0
    while True:
        regular, count = is_regular_subgroup_f2(f, H, eps)
        counts.append(count)
        if regular:
            break
        if iterations >= max_steps:
            raise InternalCheckError("iteration cap floor(eps^-3) exceeded")
        witnesses.append(_witnesses(f, H, eps))
        H = refine_step_f2(f, H, eps)
        trace.append(index_f2(f, H))
        dims.append(H.dim)
        iterations += 1
    return F2RegReport(
        subgroup=H,
        epsilon=eps,
        irregular_values=count,
        index_trace=trace,
        iterations=iterations,
        dims=dims,
        irregular_counts=counts,
        witnesses=witnesses,
    )


# ---------------------------------------------------------------------------
# counting and removal
# ---------------------------------------------------------------------------

def local_triangle_count(
    f: DenseFn,
    H: F2Subgroup,
    g1: GroupElement | int,
    g2: GroupElement | int,
    g3: GroupElement | int,
) -> float:
    """Number of (x1, x2, x3) in the three translated restrictions with zero sum.

    Computed from the subgroup-local spectra: |H|^{-1} sum_u of the product.
    """
    s1 = wht_last_axis(local_values(f, H, g1))
    s2 = wht_last_axis(local_values(f, H, g2))
    s3 = wht_last_axis(local_values(f, H, g3))
    return float(np.sum(s1 * s2 * s3)) / H.size


def _indicator_required(f: DenseFn) -> None:
    vals = f.values
    if not np.all((vals == 0.0) | (vals == 1.0)):
        raise DomainMismatchError("operation requires a 0/1 indicator function")


def reduced_set_f2(A: DenseFn, H: F2Subgroup, eps: float) -> DenseFn:
    """Delete the contents of every irregular or low-density coset of H.

    A coset is low-density when its intersection with A has at most
    (2 eps)^{1/3} |H| points.  The result loses at most 3 eps^{1/3} N elements
    when H is eps-regular for A.
    """
    _indicator_required(A)
    reps, spectra = _coset_spectra(A, H)
    sup = _sup_nontrivial(spectra)
    masses = spectra[:, 0]
    bad = (sup > eps * H.size) | (masses <= (2.0 * eps) ** (1.0 / 3.0) * H.size)
    bad_lookup = np.zeros(A.group.order, dtype=bool)
    bad_lookup[reps[bad]] = True
    all_masks = np.arange(A.group.order, dtype=np.int64)
    in_bad_coset = bad_lookup[H.reduce(all_masks)]
    kept = A.values * (~in_bad_coset)
    return DenseFn(A.group, kept)


def triangle_count_exact(A: DenseFn) -> int:
    """Exact integer count of ordered triples (x, y, z) in A^3 with x+y+z = 0.

    Literal double loop over the support; z = x ^ y is forced.
    """
    _indicator_required(A)
    _require_f2(A.group)
    supp = support(A)
    if supp.size == 0:
        return 0
    pair_sums = np.bitwise_xor.outer(supp, supp)
    return int(A.values[pair_sums].sum())


def triangle_count_spectral(A: DenseFn) -> float:
    return zero_sum_count([A, A, A])


def remove_triangles_f2(
    A: DenseFn, eps_schedule: "float | list[float] | None" = None
) -> tuple[DenseFn, int, dict]:
    """Remove elements until no zero-sum triple remains, reporting the route.

    Each schedule entry runs regularize + reduce and checks the survivor
    exactly.  If no entry certifies triangle-freeness through the counting
    argument, one further pass deletes every element still participating in
    a triangle of the best candidate (a single pass suffices: any surviving
    triple would have been a triangle among survivors already).
    """
    _indicator_required(A)
    if eps_schedule is None:
        schedule = [0.02, 0.05, 0.1, 0.2, 0.3, 0.45]
    elif isinstance(eps_schedule, float):
        schedule = [eps_schedule]
    else:
        schedule = list(eps_schedule)

    n_total = A.group.order
    attempts = []
    candidates = []
    for eps in schedule:
        rep = regularize_f2(A, eps)
        reduced = reduced_set_f2(A, rep.subgroup, eps)
        removed = int(A.values.sum() - reduced.values.sum())
        triangles = triangle_count_exact(reduced)
        bound = 3.0 * eps ** (1.0 / 3.0) * n_total
        attempts.append(
            {
                "eps": eps,
                "subgroup_dim": rep.subgroup.dim,
                "iterations": rep.iterations,
                "removed": removed,
                "removal_bound": bound,
                "removal_bound_ok": removed <= bound,
                "residual_triangles": triangles,
            }
        )
        candidates.append((triangles, removed, eps, reduced))
        if triangles == 0:
            cert = {
                "pipeline": "reduced-set",
                "eps": eps,
                "attempts": attempts,
                "spectral_triangles": triangle_count_spectral(reduced),
                "exact_triangles": 0,
                "removal_bound_ok": removed <= bound,
            }
            return reduced, removed, cert

    triangles, removed, eps, reduced = min(candidates, key=lambda c: (c[0], c[1]))
    supp = support(reduced)
    pair_sums = np.bitwise_xor.outer(supp, supp)
    participation = np.zeros(n_total)
    np.add.at(participation, supp, reduced.values[pair_sums].sum(axis=1))
    final_vals = reduced.values * (participation == 0)
    final = DenseFn(A.group, final_vals)
    removed = int(A.values.sum() - final.values.sum())
    leftover = triangle_count_exact(final)
    if leftover != 0:
        raise InternalCheckError("participant deletion left a triangle")
    bound = 3.0 * eps ** (1.0 / 3.0) * n_total
    cert = {
        "pipeline": "reduced-set+participant-deletion",
        "eps": eps,
        "attempts": attempts,
        "spectral_triangles": triangle_count_spectral(final),
        "exact_triangles": 0,
        "removal_bound_ok": removed <= bound,
    }
    return final, removed, cert
