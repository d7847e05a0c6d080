"""Regularity machinery for arbitrary finite abelian groups.

A regularity state is a pair (R, eta): a frequency set plus a width, which
induces two cutoffs psi1 (width eta) and psi2 (much narrower).  A point x is
a regular value for a set A when the local density seen through psi2 is
stable across the psi1 window (condition 1) and the psi2-windowed remainder
has a small Fourier sup-norm (condition 2).  Refinement either shrinks the
width or adjoins witness characters, and drives up a bounded L2 energy, so
the iteration terminates.

Faithful mode uses the constants verbatim, under which the narrow cutoff
collapses to a point mass at desk-scale N (recorded, not hidden).  Scaled
mode multiplies every power-of-two constant by a user factor so the loop is
exercisable on small groups; gains are then measured rather than asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bohr import BohrCutoff, FrequencySet, bohr_set, make_cutoff, make_frequency_set, norm_le_mask
from .errors import DomainMismatchError, InternalCheckError
from .groups import (
    Character,
    GroupElement,
    GroupSpec,
    add_index_table,
    neg_index,
    translate_indices,
)
from .harmonic import DenseFn, brute_force_zero_sum, convolve, dft, dft_many, zero_sum_count
from .reports import IneqReport

_TABLE_LIMIT = 2048
FAITHFUL = "faithful"
SCALED = "scaled"


class RegPair:
    """A frequency set R with width eta and the two derived cutoffs.

    eta2 = c * eps^6 * eta / (max(d,1) k^4) with c = 2^-40 in faithful mode
    and c = scale * 2^-40 in scaled mode (capped so eta2 <= eta1).
    """

    def __init__(
        self,
        chars: FrequencySet,
        eta: float,
        k: int,
        eps: float,
        mode: str = FAITHFUL,
        scale: float = 1.0,
    ):
        if mode not in (FAITHFUL, SCALED):
            raise DomainMismatchError(f"unknown constants mode {mode!r}")
        if not 0.0 < eta <= 1.0:
            raise DomainMismatchError("eta must lie in (0, 1]")
        if eps <= 0 or k < 1:
            raise DomainMismatchError("need eps > 0 and k >= 1")
        self.chars = chars
        self.eta = float(eta)
        self.k = int(k)
        self.eps = float(eps)
        self.mode = mode
        self.scale = float(scale)
        self.eta1 = self.eta
        raw = self.const(-40) * eps**6 * eta / (max(chars.d, 1) * k**4)
        self.eta2 = min(raw, self.eta1)
        self.psi1 = make_cutoff(chars, self.eta1)
        self.psi2 = make_cutoff(chars, self.eta2)
        self.compat_l1 = float(
            np.sum(np.abs(convolve(self.psi1.psi, self.psi2.psi).values - self.psi1.psi.values))
        )
        self.compat_bound = self.const(-12) * eps**3 / k**2
        self.degenerate = self.psi1.is_point_mass or self.psi2.is_point_mass
        if mode == FAITHFUL and not self.degenerate and self.compat_l1 > self.compat_bound:
            raise InternalCheckError(
                f"cutoff compatibility {self.compat_l1} exceeds {self.compat_bound}"
            )

    @property
    def group(self) -> GroupSpec:
        return self.chars.group

    @property
    def d(self) -> int:
        return self.chars.d

    def const(self, log2: int) -> float:
        base = 2.0**log2
        return base * self.scale if self.mode == SCALED else base

    def with_state(self, chars: FrequencySet, eta: float) -> "RegPair":
        return RegPair(chars, min(max(eta, 1e-300), 1.0), self.k, self.eps, self.mode, self.scale)

    def describe(self) -> dict:
        return {
            "d": self.d,
            "eta": self.eta,
            "eta2": self.eta2,
            "mode": self.mode,
            "scale": self.scale,
            "degenerate": self.degenerate,
            "compat_l1": self.compat_l1,
            "compat_bound": self.compat_bound,
        }


def trivial_pair(
    group: GroupSpec,
    k: int,
    eps: float,
    mode: str = FAITHFUL,
    scale: float = 1.0,
    seed_chars: Sequence[Character] = (),
) -> RegPair:
    """The iteration's starting state: (seed characters or empty, width 1)."""
    return RegPair(make_frequency_set(group, tuple(seed_chars)), 1.0, k, eps, mode, scale)


def alpha(A: DenseFn, cutoff: BohrCutoff) -> DenseFn:
    """Smoothed local density A * psi."""
    if A.group != cutoff.group:
        raise DomainMismatchError("set and cutoff on different groups")
    return convolve(A, cutoff.psi)


@dataclass
class RegValueWitness:
    x_index: int
    cond1_lhs: float
    cond2_lhs: float
    worst_char: Character
    regular: bool


def _translate_rows(group: GroupSpec, lo: int, hi: int) -> np.ndarray:
    if group.order <= _TABLE_LIMIT:
        return add_index_table(group)[lo:hi]
    return np.stack([translate_indices(group, x) for x in range(lo, hi)])


def regular_value_profile(A: DenseFn, pair: RegPair, chunk: int = 256):
    """(cond1, cond2, worst char index) for every x at once.

    cond1(x) = sum_y (alpha2(x+y) - alpha1(x))^2 psi1(y), expanded through
    three convolutions; cond2(x) is the exact sup over all N characters of
    |((A^{+x} - alpha2(x)) psi2)^|, computed row-block by row-block.
    """
    group = A.group
    n = group.order
    a1 = alpha(A, pair.psi1).values
    a2 = alpha(A, pair.psi2).values
    a2f = DenseFn(group, a2)
    a2sq = DenseFn(group, a2 * a2)
    smooth_sq = convolve(pair.psi1.psi, a2sq).values
    smooth = convolve(pair.psi1.psi, a2f).values
    cond1 = smooth_sq - 2.0 * a1 * smooth + a1 * a1

    psi2 = pair.psi2.psi.values
    cond2 = np.zeros(n)
    worst = np.zeros(n, dtype=np.int64)
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        rows = A.values[_translate_rows(group, lo, hi)]
        rows = (rows - a2[lo:hi, None]) * psi2[None, :]
        mags = np.abs(dft_many(group, rows))
        cond2[lo:hi] = mags.max(axis=1)
        worst[lo:hi] = mags.argmax(axis=1)
    return cond1, cond2, worst


def check_regular_value(A: DenseFn, pair: RegPair, x: GroupElement | int) -> RegValueWitness:
    """Evaluate both regularity conditions at a single point."""
    group = A.group
    idx = x.index if isinstance(x, GroupElement) else int(x)
    row = translate_indices(group, idx)
    a1 = alpha(A, pair.psi1).values
    a2 = alpha(A, pair.psi2).values
    cond1 = float(np.sum((a2[row] - a1[idx]) ** 2 * pair.psi1.psi.values))
    windowed = DenseFn(group, (A.values[row] - a2[idx]) * pair.psi2.psi.values)
    mags = np.abs(dft(windowed).values)
    worst = int(np.argmax(mags))
    cond2 = float(mags[worst])
    return RegValueWitness(
        x_index=idx,
        cond1_lhs=cond1,
        cond2_lhs=cond2,
        worst_char=group.character_at(worst),
        regular=bool(cond1 <= pair.eps**2 and cond2 <= pair.eps),
    )


def irregular_counts(As: Sequence[DenseFn], pair: RegPair) -> list[int]:
    eps = pair.eps
    out = []
    for A in As:
        cond1, cond2, _ = regular_value_profile(A, pair)
        out.append(int(np.count_nonzero((cond1 > eps**2) | (cond2 > eps))))
    return out


def is_regular_pair(As: Sequence[DenseFn], pair: RegPair) -> tuple[bool, list[int]]:
    """True iff every tracked set has fewer than eps N irregular values."""
    counts = irregular_counts(As, pair)
    n = pair.group.order
    return all(c < pair.eps * n for c in counts), counts


def index_general(As: Sequence[DenseFn], pair: RegPair) -> tuple[list[float], float]:
    """Per-set energy N^{-1} ||A_i * psi1||_2^2 and its sum (at most k)."""
    per = []
    for A in As:
        a1 = alpha(A, pair.psi1).values
        per.append(float(np.sum(a1 * a1)) / pair.group.order)
    return per, float(sum(per))


# ---------------------------------------------------------------------------
# covering lemma
# ---------------------------------------------------------------------------

def cover_by_translates(
    group: GroupSpec, U: np.ndarray | Sequence[int], kappa: float, R: FrequencySet
) -> tuple[list[np.ndarray], list[int]]:
    """Greedy cover of at least half of U by disjoint pieces of small translates.

    Each returned piece S_i sits inside (Bohr ball of radius kappa) + z_i with
    z_i in U; at most (2/kappa)^d pieces are produced.  All four postconditions
    are asserted.
    """
    if kappa <= 0:
        raise DomainMismatchError("kappa must be positive")
    u_idx = np.asarray(sorted(int(i) for i in U), dtype=np.int64)
    if u_idx.size == 0:
        raise DomainMismatchError("cover_by_translates needs a nonempty set")
    n = group.order
    lam = np.zeros(n)
    lam[bohr_set(R, kappa / 2.0)] = 1.0
    lam_fn = DenseFn(group, lam)
    big_ball = norm_le_mask(R, kappa)
    neg = neg_index(group)

    remaining = np.zeros(n, dtype=bool)
    remaining[u_idx] = True
    target = u_idx.size / 2.0
    pieces: list[np.ndarray] = []
    centers: list[int] = []
    while remaining.sum() > target:
        counts = convolve(DenseFn(group, remaining.astype(float)), lam_fn).values
        z = int(np.argmax(counts))
        ball_at_z = lam[translate_indices(group, int(neg[z]))] > 0.5
        piece = np.flatnonzero(remaining & ball_at_z)
        if piece.size == 0:
            raise InternalCheckError("covering step found an empty piece")
        center = int(piece[0])
        pieces.append(piece)
        centers.append(center)
        remaining[piece] = False
        shifted = translate_indices(group, int(neg[center]))
        if not np.all(big_ball[shifted[piece]]):
            raise InternalCheckError("piece escapes its translate")

    covered = u_idx.size - int(remaining.sum())
    if covered < target:
        raise InternalCheckError("cover fell below half of U")
    if kappa <= 2.0 and len(pieces) > (2.0 / kappa) ** R.d:
        raise InternalCheckError("piece count exceeded (2/kappa)^d")
    return pieces, centers


# ---------------------------------------------------------------------------
# refinement
# ---------------------------------------------------------------------------

def _safe_pow(base: float, exponent: int) -> float:
    try:
        return base**exponent
    except OverflowError:
        return math.inf


def branch_decision(
    cond1: np.ndarray,
    cond2: np.ndarray,
    worst: np.ndarray,
    perp: np.ndarray,
    eps: float,
    k: int,
) -> dict:
    """Pick the refinement route from one set's regularity profile.

    Local-density failures (condition 1) at eps N / 2k or more points shrink
    the width.  Otherwise the sup-norm failures Z split on whether their
    witness characters sit in the near-orthogonal set of psi2: at least half
    aligned (ties included) keeps R and shrinks hard; else the escapers get
    covered by small translates and their witnesses join R.
    """
    n = cond1.shape[0]
    fail1 = int(np.count_nonzero(cond1 > eps**2))
    if fail1 >= eps * n / (2 * k):
        return {"branch": "width-shrink", "fail1": fail1}
    z_idx = np.flatnonzero(cond2 > eps)
    in_perp = perp[worst[z_idx]]
    aligned = int(in_perp.sum())
    if 2 * aligned >= z_idx.size:
        return {"branch": "aligned-witnesses", "z_idx": z_idx, "aligned": aligned}
    return {
        "branch": "new-characters",
        "z_idx": z_idx,
        "aligned": aligned,
        "escapers": z_idx[~in_perp],
    }


def _refine_pair_detailed(As: Sequence[DenseFn], pair: RegPair) -> tuple[RegPair, dict]:
    eps, k, n = pair.eps, pair.k, pair.group.order
    profiles = [regular_value_profile(A, pair) for A in As]
    counts = [
        int(np.count_nonzero((c1 > eps**2) | (c2 > eps))) for c1, c2, _ in profiles
    ]
    if all(c < eps * n for c in counts):
        raise DomainMismatchError("refine_pair called on a regular pair")
    i = int(np.argmax(counts))
    cond1, cond2, worst = profiles[i]
    fail1 = int(np.count_nonzero(cond1 > eps**2))
    fail2 = int(np.count_nonzero(cond2 > eps))

    per_before, total_before = index_general(As, pair)
    info: dict = {
        "set": i,
        "per_set_irregular": counts,
        "cond1_failures": fail1,
        "cond2_failures": fail2,
        "index_before": total_before,
        "d": pair.d,
        "eta": pair.eta,
        "eta2": pair.eta2,
    }

    perp = pair.psi2.psi_hat.values.real >= eps / 6.0
    decision = branch_decision(cond1, cond2, worst, perp, eps, k)
    info["branch"] = decision["branch"]
    if decision["branch"] == "width-shrink":
        new_pair = pair.with_state(pair.chars, pair.eta2)
        info["witnesses"] = []
    elif decision["branch"] == "aligned-witnesses":
        new_eta = pair.const(-80) * eps**12 * pair.eta / (max(pair.d, 1) ** 2 * k**8)
        new_pair = pair.with_state(pair.chars, new_eta)
        info["witnesses"] = []
        info["aligned_count"] = decision["aligned"]
    else:
        u_set = decision["escapers"]
        kappa = eps * pair.eta2 / 60.0
        _, centers = cover_by_translates(pair.group, u_set, kappa, pair.chars)
        new_chars: list[Character] = []
        for z in centers:
            chi = pair.group.character_at(int(worst[z]))
            if chi not in new_chars:
                new_chars.append(chi)
        extended = pair.chars.extend(new_chars)
        new_eta = pair.const(-50) * eps**6 * pair.eta2 / (max(extended.d, 1) * k**4)
        new_pair = pair.with_state(extended, new_eta)
        info["witnesses"] = [list(c.freqs) for c in new_chars]
        info["smoothing_l1"] = float(
            np.sum(
                np.abs(
                    convolve(pair.psi2.psi, new_pair.psi1.psi).values
                    - pair.psi2.psi.values
                )
            )
        )

    _, total_after = index_general(As, new_pair)
    info["index_after"] = total_after
    gain = total_after - total_before
    info["index_gain"] = gain
    target = pair.const(-10) * eps**3 / k
    info["gain_target"] = target

    d_eff = max(pair.d, 1)
    size_bound = _safe_pow(2.0 * d_eff * k / (pair.eta * eps), 60 * d_eff)
    info["size_bound_ok"] = new_pair.d <= size_bound
    info["width_bound_ok"] = new_pair.eta >= _safe_pow(pair.eta * eps / (2 * d_eff * k), 60 * d_eff)

    if (
        pair.mode == FAITHFUL
        and not pair.degenerate
        and not new_pair.degenerate
        and gain < target - 1e-12
    ):
        raise InternalCheckError(f"index gain {gain} below target {target}")
    return new_pair, info


def refine_pair(As: Sequence[DenseFn], pair: RegPair) -> RegPair:
    """One refinement step; raises if the pair is already regular."""
    new_pair, _ = _refine_pair_detailed(As, pair)
    return new_pair


def regularize(
    As: Sequence[DenseFn],
    eps: float,
    budget: int,
    mode: str = FAITHFUL,
    scale: float = 1.0,
    seed_chars: Sequence[Character] = (),
) -> tuple[RegPair, dict]:
    """Iterate refinement from the trivial pair until regular or out of budget."""
    if budget < 1:
        raise DomainMismatchError("budget must be >= 1")
    group = As[0].group
    for A in As:
        if A.group != group:
            raise DomainMismatchError("sets on different groups")
    pair = trivial_pair(group, len(As), eps, mode, scale, seed_chars)
    steps: list[dict] = []
    best_pair, best_index = pair, index_general(As, pair)[1]
    for _ in range(budget):
        regular, counts = is_regular_pair(As, pair)
        if regular:
            trace = {
                "iterations": steps,
                "converged": True,
                "budget_exhausted": False,
                "final": pair.describe() | {"per_set_irregular": counts},
            }
            return pair, trace
        pair, info = _refine_pair_detailed(As, pair)
        steps.append(info)
        total = info["index_after"]
        if total >= best_index:
            best_pair, best_index = pair, total
    regular, counts = is_regular_pair(As, pair)
    if regular:
        return pair, {
            "iterations": steps,
            "converged": True,
            "budget_exhausted": False,
            "final": pair.describe() | {"per_set_irregular": counts},
        }
    return best_pair, {
        "iterations": steps,
        "converged": False,
        "budget_exhausted": True,
        "final": best_pair.describe() | {"per_set_irregular": counts},
    }


# ---------------------------------------------------------------------------
# weighted counting
# ---------------------------------------------------------------------------

@dataclass
class WeightedCountReport:
    value: float
    alpha_product: float
    bound: float
    bound_ok: bool
    irregular_slots: list[int] = field(default_factory=list)


def _weighted_functions(
    As: Sequence[DenseFn], pair: RegPair, xs: Sequence[int]
) -> list[DenseFn]:
    group = pair.group
    out = []
    k = len(As)
    for j, (A, x) in enumerate(zip(As, xs)):
        shifted = A.values[translate_indices(group, x)]
        weight = pair.psi1.psi_sqrt.values if j in (0, k - 1) else pair.psi2.psi.values
        out.append(DenseFn(group, shifted * weight))
    return out


def weighted_T(
    As: Sequence[DenseFn], pair: RegPair, xs: Sequence[GroupElement | int]
) -> WeightedCountReport:
    """Cutoff-weighted zero-sum count at a tuple of regular base points.

    The first and last slots carry psi1^(1/2), middle slots psi2; the value is
    compared against the product of the matching smoothed densities with
    tolerance 4 * 2^k * eps.  Non-regular slots are reported, not fatal.
    """
    group = pair.group
    if len(As) != pair.k:
        raise DomainMismatchError("pair was built for a different number of sets")
    idxs = [x.index if isinstance(x, GroupElement) else int(x) for x in xs]
    if len(idxs) != len(As):
        raise DomainMismatchError("need one base point per set")
    total = idxs[0]
    for x in idxs[1:]:
        total = int(translate_indices(group, total)[x])
    if total != 0:
        raise DomainMismatchError("base points must sum to zero")

    irregular = [
        j for j, (A, x) in enumerate(zip(As, idxs))
        if not check_regular_value(A, pair, x).regular
    ]
    value = zero_sum_count(_weighted_functions(As, pair, idxs))
    k = len(As)
    prod = 1.0
    for j, (A, x) in enumerate(zip(As, idxs)):
        cutoff = pair.psi1 if j in (0, k - 1) else pair.psi2
        prod *= float(alpha(A, cutoff).values[x])
    bound = 4.0 * 2.0**k * pair.eps
    return WeightedCountReport(
        value=value,
        alpha_product=prod,
        bound=bound,
        bound_ok=bool(abs(value - prod) <= bound),
        irregular_slots=irregular,
    )


def check_uniform_weight_count(pair: RegPair, f: DenseFn, k: int) -> IneqReport:
    """|T(psi1^(1/2), psi2, ..., psi2, f psi1^(1/2)) - sum f psi1| <= 2^k eps."""
    if k < 2:
        raise DomainMismatchError("need k >= 2 slots")
    sup = float(np.max(np.abs(f.values)))
    fns = (
        [pair.psi1.psi_sqrt]
        + [pair.psi2.psi] * (k - 2)
        + [DenseFn(pair.group, f.values * pair.psi1.psi_sqrt.values)]
    )
    value = zero_sum_count(fns)
    center = float(np.sum(f.values * pair.psi1.psi.values))
    lhs = abs(value - center)
    rhs = 2.0**k * pair.eps
    return IneqReport(
        part="uniform-weight-count",
        lhs=lhs,
        rhs=rhs,
        holds=lhs <= rhs,
        hypothesis_ok=sup <= 1.0 + 1e-12,
        details={"value": value, "center": center, "k": k, "sup_f": sup},
    )


def _correlate(phi: DenseFn, h: DenseFn) -> np.ndarray:
    """sum_y phi(y) h(x + y) as an array over x."""
    reversed_phi = DenseFn(phi.group, phi.values[neg_index(phi.group)])
    return convolve(reversed_phi, h).values


def check_energy_difference(phi1: DenseFn, phi2: DenseFn, f: DenseFn) -> IneqReport:
    """Energy growth under smoothing, with the local variance identity.

    Verifies pointwise that sum_y (f2(x+y) - (f2*phi1)(x))^2 phi1(y) equals
    (f2^2 * phi1)(x) - ((f2*phi1)(x))^2 (exact for symmetric unit-mass phi1),
    then the inequality ||f2||^2 - ||f1||^2 >= double sum - 8 kappa N with
    kappa = ||phi1 * phi2 - phi1||_1.
    """
    group = f.group
    n = group.order
    kappa = float(np.sum(np.abs(convolve(phi1, phi2).values - phi1.values)))
    f1 = convolve(f, phi1)
    f2 = convolve(f, phi2)
    f2sq = DenseFn(group, f2.values**2)

    corr_f2 = _correlate(phi1, f2)
    corr_f2sq = _correlate(phi1, f2sq)
    mass = float(phi1.values.sum())
    smooth = convolve(f2, phi1).values
    identity_lhs = corr_f2sq - 2.0 * smooth * corr_f2 + smooth**2 * mass
    identity_rhs = convolve(f2sq, phi1).values - smooth**2
    identity_residue = float(np.max(np.abs(identity_lhs - identity_rhs)))

    energy_gap = float(np.sum(f2.values**2) - np.sum(f1.values**2))
    double_sum = float(
        np.sum(corr_f2sq - 2.0 * f1.values * corr_f2 + f1.values**2 * mass)
    )
    rhs = double_sum - 8.0 * kappa * n
    sup_f = float(np.max(np.abs(f.values)))
    symmetric = bool(np.allclose(phi1.values, phi1.values[neg_index(group)]))
    return IneqReport(
        part="energy-difference",
        lhs=rhs,
        rhs=energy_gap,
        holds=energy_gap >= rhs - 1e-9,
        hypothesis_ok=sup_f <= 1.0 + 1e-12,
        details={
            "kappa": kappa,
            "identity_residue": identity_residue,
            "energy_gap": energy_gap,
            "double_sum": double_sum,
            "phi1_symmetric": symmetric,
            "phi1_mass": mass,
            "sup_f": sup_f,
        },
    )


def check_witness_stability(
    A: DenseFn, pair: RegPair, x: GroupElement | int, chi: Character
) -> dict:
    """Large windowed coefficients persist across a small Bohr ball.

    Premise: chi outside the near-orthogonal set of psi2 and coefficient at
    least eps at x.  Conclusion: at least eps/2 everywhere on the ball of
    radius eps * eta2 / 60 around x.
    """
    group = A.group
    idx = x.index if isinstance(x, GroupElement) else int(x)
    eps = pair.eps
    a2 = alpha(A, pair.psi2).values
    chi_idx = chi.index
    hat2 = float(pair.psi2.psi_hat.values[chi_idx].real)

    def coeff_at(y: int) -> float:
        row = translate_indices(group, y)
        fn = DenseFn(group, (A.values[row] - a2[y]) * pair.psi2.psi.values)
        return float(np.abs(dft(fn).values[chi_idx]))

    premise_coeff = coeff_at(idx)
    radius = eps * pair.eta2 / 60.0
    ball = bohr_set(pair.chars, radius) if radius > 0 else np.array([0])
    row = translate_indices(group, idx)
    ys = row[ball]
    values = np.array([coeff_at(int(y)) for y in ys])
    return {
        "premise_ok": bool(hat2 < eps / 6.0 and premise_coeff >= eps),
        "psi2_hat_at_chi": hat2,
        "premise_coeff": premise_coeff,
        "ball_size": int(ys.size),
        "min_over_ball": float(values.min()),
        "threshold": eps / 2.0,
        "holds": bool(values.min() >= eps / 2.0),
    }


# ---------------------------------------------------------------------------
# reduced sets and zero-sum removal
# ---------------------------------------------------------------------------

def _indicator_required(A: DenseFn) -> None:
    if not np.all((A.values == 0.0) | (A.values == 1.0)):
        raise DomainMismatchError("operation requires a 0/1 indicator function")


def reduced_sets(As: Sequence[DenseFn], pair: RegPair) -> list[DenseFn]:
    """Delete irregular and low-density members of each set.

    x in A_i is dropped when it is not a regular value or when either
    smoothed density alpha_{i,1}(x) or alpha_{i,2}(x) is at most 4 eps^{1/k};
    the loss is at most 10 k eps^{1/k} N per set for a regular pair.
    """
    if len(As) != pair.k:
        raise DomainMismatchError("pair was built for a different number of sets")
    eps, k = pair.eps, pair.k
    threshold = 4.0 * eps ** (1.0 / k)
    out = []
    for A in As:
        _indicator_required(A)
        cond1, cond2, _ = regular_value_profile(A, pair)
        regular = (cond1 <= eps**2) & (cond2 <= eps)
        a1 = alpha(A, pair.psi1).values
        a2 = alpha(A, pair.psi2).values
        keep = regular & (a1 > threshold) & (a2 > threshold)
        out.append(DenseFn(A.group, A.values * keep))
    return out


def check_low_density_count(A: DenseFn, cutoff: BohrCutoff, rho: float) -> IneqReport:
    """At most rho N members of A can have smoothed density A * psi <= rho."""
    if rho <= 0:
        raise DomainMismatchError("rho must be positive")
    _indicator_required(A)
    smoothed = alpha(A, cutoff).values
    count = int(np.count_nonzero((A.values > 0.5) & (smoothed <= rho)))
    bound = rho * A.group.order
    return IneqReport(
        part="low-density-count",
        lhs=float(count),
        rhs=bound,
        holds=count <= bound,
        details={"rho": rho, "members": int(A.values.sum())},
    )


def exact_zero_sum_tuples(As: Sequence[DenseFn]) -> int:
    """Exact integer count of zero-sum tuples across indicator sets."""
    for A in As:
        _indicator_required(A)
    group = As[0].group
    k = len(As)
    if group.order ** (k - 1) <= 20_000_000:
        return round(brute_force_zero_sum(As))
    return round(zero_sum_count(As))


def _participation_counts(As: Sequence[DenseFn]) -> np.ndarray:
    """Number of zero-sum completions per first-coordinate value."""
    group = As[0].group
    conv = As[1]
    for A in As[2:]:
        conv = convolve(conv, A)
    return conv.values[neg_index(group)]


def zero_sum_removal(
    As: Sequence[DenseFn],
    eps: float,
    mode: str = SCALED,
    scale: float = 1.0,
    budget: int = 64,
    eps_schedule: "list[float] | None" = None,
) -> tuple[list[DenseFn], list[int], dict]:
    """Delete few elements from each set so no zero-sum tuple survives.

    Runs regularize + reduce per epsilon in the schedule and verifies the
    survivor count exactly; larger epsilons delete more aggressively (the
    density thresholds 4 eps^{1/k} eventually clear every set).  If no entry
    reaches zero, one pass removes from the first set every element that
    still completes a zero-sum tuple.  The certificate records each attempt,
    the removal bound 10 k eps^{1/k} N, and the coupling ratio
    3^k delta / eta2^{dk} against eps.
    """
    k = len(As)
    if k < 3:
        raise DomainMismatchError("zero-sum removal needs k >= 3 sets")
    for A in As:
        _indicator_required(A)
    group = As[0].group
    n = group.order
    initial = exact_zero_sum_tuples(As)
    density = initial / n ** (k - 1)
    schedule = list(eps_schedule) if eps_schedule else [eps, 0.2, 0.3, 0.45, 0.8, 1.5]

    attempts = []
    candidates = []
    for e in schedule:
        pair, trace = regularize(As, e, budget, mode, scale)
        reduced = reduced_sets(As, _ensure_k(pair, e, k))
        removed = [int(A.values.sum() - B.values.sum()) for A, B in zip(As, reduced)]
        residual = exact_zero_sum_tuples(reduced)
        bound = 10.0 * k * e ** (1.0 / k) * n
        with np.errstate(over="ignore", divide="ignore"):
            eta2_power = pair.eta2 ** (pair.d * k) if pair.d else 1.0
            coupling = 3.0**k * density / eta2_power if eta2_power else math.inf
        attempt = {
            "eps": e,
            "converged": trace["converged"],
            "d": pair.d,
            "eta": pair.eta,
            "eta2": pair.eta2,
            "removed": removed,
            "removal_bound": bound,
            "removal_bound_ok": all(r <= bound for r in removed),
            "residual_tuples": residual,
            "coupling_ratio": coupling,
            "coupling_ok": bool(coupling < e),
        }
        attempts.append(attempt)
        candidates.append((residual, sum(removed), e, reduced))
        if residual == 0:
            cert = {
                "pipeline": "reduced-sets",
                "eps": e,
                "initial_tuples": initial,
                "attempts": attempts,
                "spectral_tuples": zero_sum_count(reduced),
            }
            return list(reduced), removed, cert

    residual, _, e, reduced = min(candidates, key=lambda c: (c[0], c[1]))
    participation = _participation_counts(reduced)
    first = DenseFn(group, reduced[0].values * (np.round(participation) < 0.5))
    final = [first] + list(reduced[1:])
    if exact_zero_sum_tuples(final) != 0:
        raise InternalCheckError("participant deletion left a zero-sum tuple")
    removed = [int(A.values.sum() - B.values.sum()) for A, B in zip(As, final)]
    cert = {
        "pipeline": "reduced-sets+participant-deletion",
        "eps": e,
        "initial_tuples": initial,
        "attempts": attempts,
        "spectral_tuples": zero_sum_count(final),
    }
    return final, removed, cert


def _ensure_k(pair: RegPair, eps: float, k: int) -> RegPair:
    """Rebuild the pair if regularize ran with different k/eps bookkeeping."""
    if pair.k == k and pair.eps == eps:
        return pair
    return RegPair(pair.chars, pair.eta, k, eps, pair.mode, pair.scale)
