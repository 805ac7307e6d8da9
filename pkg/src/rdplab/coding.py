"""Executable coding schemes: one-shot circle coders, typical-set block codes
with circular-shift derandomization, seed simulation, soft covering, and
perception auditing.

Every simulation is bit-reproducible given (seed, parameters): randomness
comes from Philox counter streams, block trials each own the stream
`TRIAL_BASE + trial`, and codebook generation owns `CODEBOOK_STREAM`.
"""

from __future__ import annotations

import bisect
import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .closed_forms import circle_analytic
from .divergences import KL, TV, DivergenceSpec, divergence, maximal_coupling, total_variation, wasserstein_sq
from .pmf import Channel, Pmf, empirical_pmf
from .rng import AUX_STREAM, CODEBOOK_STREAM, TRIAL_BASE, randint_below, stream

MAX_CODEBOOK_WORDS = 1 << 20
MAX_ENUMERATION = 1 << 24
MAX_SEED_ATOMS = 1 << 22


@dataclass(frozen=True, eq=False)
class Codebook:
    """Fixed list of length-n words over the target alphabet.

    `words` holds symbol indices into `target.labels`; all words are
    delta-typical for the target distribution.
    """

    n: int
    words: np.ndarray = field(repr=False)
    target: Pmf = None  # type: ignore[assignment]
    delta: float = 0.0
    rate_bits: float = 0.0

    def __post_init__(self) -> None:
        w = np.asarray(self.words, dtype=np.int64)
        if w.ndim != 2 or w.shape[1] != self.n:
            raise ValueError("words must be an (M, n) index array")
        if w.size and (w.min() < 0 or w.max() >= len(self.target.atoms)):
            raise ValueError("word symbol index out of range")
        object.__setattr__(self, "words", w)

    @property
    def alphabet(self) -> tuple:
        return self.target.labels

    def word_labels(self, m: int) -> tuple:
        labels = self.target.labels
        return tuple(labels[i] for i in self.words[m])

    def __len__(self) -> int:
        return self.words.shape[0]


@dataclass(frozen=True, eq=False)
class SimReport:
    n: int
    trials: int
    rate_bits: float
    avg_distortion: float
    per_letter_marginals: list[Pmf]
    max_perletter_divergence: float
    perception_violations: int
    seed: int
    diagnostics: dict | None = None


@dataclass(frozen=True)
class CircleEstimate:
    scheme: str
    samples: int
    mean: float
    std_error: float
    analytic: float


# ---------------------------------------------------------------------------
# One-shot circle schemes
# ---------------------------------------------------------------------------

CIRCLE_SCHEMES = ("private", "common", "antipodal", "unconstrained")


def simulate_circle(
    scheme: str, samples: int, seed: int = 0, exact: bool = False
) -> CircleEstimate:
    """One-bit coding of a uniform point on the unit circle.

    private:       K = half-plane of the angle; the decoder resimulates the
                   half-circle with its own uniform W.
    common:        one-bit dithered quantization of the angle with a shared
                   dither W; the decoder outputs the dithered cell midpoint.
    antipodal:     deterministic K, reconstruction points (0, +-1).
    unconstrained: deterministic K, reconstruction points (0, +-2/pi) inside
                   the circle.

    `exact` integrates the deterministic schemes over the angle instead of
    sampling.
    """
    if scheme not in CIRCLE_SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    consts = circle_analytic()
    analytic = {
        "private": consts.private,
        "common": consts.common_or_antipodal,
        "antipodal": consts.common_or_antipodal,
        "unconstrained": consts.unconstrained,
    }[scheme]
    if exact:
        if scheme == "antipodal":
            val = quad(lambda t: 2.0 - 2.0 * math.cos(t - math.pi / 2), 0.0, math.pi)[0]
            val += quad(
                lambda t: 2.0 - 2.0 * math.cos(t - 3 * math.pi / 2), math.pi, 2 * math.pi
            )[0]
            mean = val / (2 * math.pi)
        elif scheme == "unconstrained":
            val = quad(
                lambda t: 1.0 + 4.0 / math.pi**2 - (4.0 / math.pi) * abs(math.sin(t)),
                0.0,
                2 * math.pi,
                limit=200,
            )[0]
            mean = val / (2 * math.pi)
        else:
            raise ValueError(f"exact integration needs a deterministic scheme, not {scheme!r}")
        return CircleEstimate(scheme, 0, float(mean), 0.0, analytic)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    gen = stream(seed, AUX_STREAM)
    theta = 2.0 * math.pi * gen.random(samples)
    if scheme == "private":
        k = (theta >= math.pi).astype(float)
        w = gen.random(samples)
        dist = 2.0 - 2.0 * np.cos(theta - (k + w) * math.pi)
    elif scheme == "common":
        w = gen.random(samples)
        cell = np.floor(theta / math.pi + w)
        dist = 2.0 - 2.0 * np.cos(theta - (cell + 0.5 - w) * math.pi)
    elif scheme == "antipodal":
        k = (theta >= math.pi).astype(float)
        dist = 2.0 - 2.0 * np.cos(theta - (0.5 + k) * math.pi)
    else:
        dist = 1.0 + 4.0 / math.pi**2 - (4.0 / math.pi) * np.abs(np.sin(theta))
    mean = float(dist.mean())
    std_error = float(dist.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.inf
    return CircleEstimate(scheme, samples, mean, std_error, analytic)


# ---------------------------------------------------------------------------
# Typical-set codebooks
# ---------------------------------------------------------------------------


def _typical_compositions(n: int, probs: np.ndarray, delta: float) -> list[tuple[int, ...]]:
    k = len(probs)
    lo = [max(0, math.ceil(n * p * (1.0 - delta) - 1e-9)) for p in probs]
    hi = [min(n, math.floor(n * p * (1.0 + delta) + 1e-9)) for p in probs]
    out: list[tuple[int, ...]] = []

    def rec(idx: int, remaining: int, acc: list[int]) -> None:
        if idx == k - 1:
            c = remaining
            if lo[idx] <= c <= hi[idx]:
                out.append(tuple(acc + [c]))
            return
        lo_rest = sum(lo[idx + 1 :])
        hi_rest = sum(hi[idx + 1 :])
        for c in range(lo[idx], hi[idx] + 1):
            if lo_rest <= remaining - c <= hi_rest:
                rec(idx + 1, remaining - c, acc + [c])

    rec(0, n, [])
    # keep exactly the compositions whose empirical law passes the float check
    valid = []
    for comp in out:
        gamma = np.array(comp, dtype=float) / n
        if np.all(np.abs(gamma - probs) <= delta * probs):
            valid.append(comp)
    return valid


def _multinomial_size(n: int, comp: tuple[int, ...]) -> int:
    size = math.factorial(n)
    for c in comp:
        size //= math.factorial(c)
    return size


def random_typical_codebook(
    target: Pmf, n: int, rate_bits: float, delta: float, seed: int = 0
) -> Codebook:
    """Draw floor(2^{n R}) words independently and uniformly from the
    delta-typical set of `target`.

    Small instances enumerate type classes and sample them exactly (uniform
    over the typical set); otherwise i.i.d. rejection sampling is used.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if rate_bits < 0.0:
        raise ValueError("rate must be nonnegative")
    probs = target.probs
    if np.any(probs <= 0.0):
        raise ValueError("target must have full support; restrict the alphabet first")
    n_words_exact = 2.0 ** (n * rate_bits)
    if n_words_exact > MAX_CODEBOOK_WORDS:
        raise ValueError("codebook larger than 2^20 words")
    n_words = max(1, int(n_words_exact))
    gen = stream(seed, CODEBOOK_STREAM)
    k = len(probs)
    span = 1
    for p in probs:
        hi = math.floor(n * p * (1.0 + delta) + 1e-9)
        lo = max(0, math.ceil(n * p * (1.0 - delta) - 1e-9))
        span *= max(0, hi - lo + 1)
    if 0 < span <= 500_000:
        comps = _typical_compositions(n, probs, delta)
        if not comps:
            raise ValueError(f"delta-typical set empty for n={n}, delta={delta}")
        sizes = [_multinomial_size(n, c) for c in comps]
        cum = [0]  # python ints: multinomial sizes overflow int64 easily
        for s in sizes:
            cum.append(cum[-1] + s)
        total = cum[-1]
        words = np.empty((n_words, n), dtype=np.int64)
        for m in range(n_words):
            r = randint_below(gen, total)
            t = bisect.bisect_right(cum, r) - 1
            multiset = np.repeat(np.arange(k), comps[t])
            words[m] = gen.permutation(multiset)
    else:
        words = _rejection_sample_words(gen, target, n, delta, n_words)
    return Codebook(
        n=n,
        words=words,
        target=target,
        delta=delta,
        rate_bits=math.log2(n_words) / n,
    )


def _rejection_sample_words(gen, target, n, delta, n_words):
    probs = target.probs
    cum = np.cumsum(probs)
    words = np.empty((n_words, n), dtype=np.int64)
    got = 0
    for _ in range(200_000):
        batch = max(64, 2 * (n_words - got))
        draw = np.searchsorted(cum, gen.random((batch, n)), side="right")
        counts = np.stack([(draw == a).sum(axis=1) for a in range(len(probs))], axis=1)
        gamma = counts / n
        ok = np.all(np.abs(gamma - probs[None, :]) <= delta * probs[None, :], axis=1)
        accepted = draw[ok]
        take = min(len(accepted), n_words - got)
        words[got : got + take] = accepted[:take]
        got += take
        if got == n_words:
            return words
    raise ValueError("rejection sampling failed; delta-typical set too small")


def _distortion_matrix(dist, source_labels, target_labels) -> np.ndarray:
    if callable(dist):
        mat = np.array(
            [[float(dist(x, y)) for y in target_labels] for x in source_labels]
        )
    else:
        mat = np.asarray(dist, dtype=float)
    if mat.shape != (len(source_labels), len(target_labels)):
        raise ValueError(
            f"distortion shape {mat.shape}, expected "
            f"{(len(source_labels), len(target_labels))}"
        )
    if np.any(mat < 0.0) or not np.all(np.isfinite(mat)):
        raise ValueError("distortion must be finite and nonnegative")
    return mat


def encode_min_distortion(
    cb: Codebook,
    xn,
    dist,
    source_alphabet=None,
    mode: str = "min_distortion",
    threshold: float | None = None,
) -> int:
    """Index of the codeword minimizing the blockwise distortion to `xn`.

    Ties break toward the lowest index.  mode="threshold" instead returns the
    first word whose per-letter distortion is at most `threshold`, falling
    back to index 0 (the construction the covering argument analyses).
    """
    src = tuple(source_alphabet) if source_alphabet is not None else cb.alphabet
    mat = _distortion_matrix(dist, src, cb.alphabet)
    index = {a: i for i, a in enumerate(src)}
    x_idx = np.array([index[s] for s in xn], dtype=np.int64)
    if len(x_idx) != cb.n:
        raise ValueError(f"sequence length {len(x_idx)} != block length {cb.n}")
    lookup = mat[x_idx]  # (n, |alphabet|)
    totals = lookup[np.arange(cb.n)[None, :], cb.words].sum(axis=1)
    if mode == "min_distortion":
        return int(np.argmin(totals))
    if mode == "threshold":
        if threshold is None:
            raise ValueError("threshold mode needs a threshold")
        hits = np.nonzero(totals / cb.n <= threshold)[0]
        return int(hits[0]) if hits.size else 0
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# Seed simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SeedMap:
    """Deterministic map from n0 source symbols to a near-uniform value in [0:n-1]."""

    n0: int
    n_bins: int
    alphabet: tuple
    bins: np.ndarray = field(repr=False)
    tv_to_uniform: float = 0.0
    bound: float = 0.0

    def assign(self, idx: np.ndarray) -> np.ndarray:
        """Bin of each row of an (T, n0) array of symbol indices."""
        idx = np.asarray(idx, dtype=np.int64)
        k = len(self.alphabet)
        rank = np.zeros(len(idx), dtype=np.int64)
        for j in range(self.n0):
            rank = rank * k + idx[:, j]
        return self.bins[rank]


def simulate_seed_map(p_x: Pmf, n0: int, n: int) -> SeedMap:
    """Greedy near-uniform binning of the |X|^{n0} product atoms into n bins.

    Atoms are placed largest-first into the currently lightest bin, so each
    bin overshoots 1/n by at most p_max^{n0}; hence the total variation to
    Unif[0:n-1] is at most n * p_max^{n0} (checked, and returned exactly).
    """
    if n0 < 1 or n < 1:
        raise ValueError("n0 and n must be positive")
    k = len(p_x.atoms)
    if k**n0 > MAX_SEED_ATOMS:
        raise ValueError(f"{k}^{n0} product atoms exceed the enumeration cap")
    probs = p_x.probs
    masses = probs.copy()
    for _ in range(n0 - 1):
        masses = np.multiply.outer(masses, probs).ravel()
    order = np.argsort(-masses, kind="stable")
    bins = np.empty(len(masses), dtype=np.int64)
    heap = [(0.0, b) for b in range(n)]
    heapq.heapify(heap)
    for rank in order:
        total, b = heapq.heappop(heap)
        bins[rank] = b
        heapq.heappush(heap, (total + float(masses[rank]), b))
    bin_totals = np.zeros(n)
    np.add.at(bin_totals, bins, masses)
    tv = float(0.5 * np.abs(bin_totals - 1.0 / n).sum())
    bound = n * float(probs.max()) ** n0
    if tv > bound + 1e-12:
        raise RuntimeError(f"seed-map TV {tv} violates the bound {bound}")
    return SeedMap(
        n0=n0,
        n_bins=n,
        alphabet=p_x.labels,
        bins=bins,
        tv_to_uniform=tv,
        bound=bound,
    )


# ---------------------------------------------------------------------------
# Shift-ensemble block coding
# ---------------------------------------------------------------------------

SHARED_SEED = "shared_seed"
DERANDOMIZED = "derandomized"


def shift_ensemble_sim(
    target_channel: Channel,
    p_x: Pmf,
    dist,
    n: int,
    rate_bits: float,
    delta: float,
    trials: int,
    seed: int = 0,
    mode: str = SHARED_SEED,
    alpha: float = 0.1,
    perception_divergence: DivergenceSpec | None = None,
    perception_budget: float | None = None,
) -> SimReport:
    """Block-code simulation over the ensemble of circularly shifted codebooks.

    One typical-set codebook is drawn for the pushforward of `p_x` through
    `target_channel`; shift q encodes s_{-q}(x^n) with the base code and
    shifts the chosen word back.  shared_seed draws q uniformly per trial;
    derandomized computes q from floor(alpha*n) extra source symbols through
    a seed map and reuses the first reconstructions for that tail.

    The report carries per-letter reconstruction marginals, their worst total
    variation to the target marginal, the average distortion (tail included
    in derandomized mode), and the number of trials whose reconstruction
    block violates the empirical perception budget (default: divergence of
    the target marginal from the source plus the typicality slack
    2 * delta * |support|).
    """
    if mode not in (SHARED_SEED, DERANDOMIZED):
        raise ValueError(f"unknown mode {mode!r}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p_tilde_full = target_channel.push(p_x)
    support = p_tilde_full.support()
    p_tilde = Pmf.from_pairs([(a, p_tilde_full.prob(a)) for a in support])
    cb = random_typical_codebook(p_tilde, n, rate_bits, delta, seed)
    src_labels = p_x.labels
    mat = _distortion_matrix(dist, src_labels, p_tilde_full.labels)
    col_idx = [p_tilde_full.labels.index(a) for a in support]
    mat = mat[:, col_idx]
    k_src = len(src_labels)
    n0 = 0
    seed_map = None
    if mode == DERANDOMIZED:
        n0 = int(math.floor(alpha * n))
        cap = int(math.floor(math.log(MAX_SEED_ATOMS, max(2, k_src))))
        n0 = min(n0, cap)
        if n0 < 1:
            raise ValueError("alpha * n below one symbol; derandomized mode needs a tail")
        seed_map = simulate_seed_map(p_x, n0, n)
    # per-trial streams: source block and the shared shift
    cum_src = np.cumsum(p_x.probs)
    x_all = np.empty((trials, n + n0), dtype=np.int64)
    qs = np.empty(trials, dtype=np.int64)
    for t in range(trials):
        gen = stream(seed, TRIAL_BASE + t)
        u = gen.random(n + n0)
        x_all[t] = np.searchsorted(cum_src, u, side="right")
        if mode == SHARED_SEED:
            qs[t] = gen.integers(0, n)
    if mode == DERANDOMIZED:
        qs = seed_map.assign(x_all[:, n:])
    x_head = x_all[:, :n]
    cols_enc = (np.arange(n)[None, :] - qs[:, None]) % n
    xs = np.take_along_axis(x_head, cols_enc, axis=1)
    m_star, dist_head = _batch_encode(xs, cb.words, mat, k_src)
    base = cb.words[m_star]
    cols_dec = (np.arange(n)[None, :] + qs[:, None]) % n
    xhat = np.take_along_axis(base, cols_dec, axis=1)
    if mode == DERANDOMIZED:
        tail_d = np.zeros(trials)
        for j in range(n0):
            tail_d += mat[x_all[:, n + j], xhat[:, j]]
        avg_distortion = float(np.mean((dist_head + tail_d) / (n + n0)))
    else:
        avg_distortion = float(np.mean(dist_head / n))
    k_tgt = len(support)
    counts = np.zeros((n, k_tgt))
    for b in range(k_tgt):
        counts[:, b] = (xhat == b).sum(axis=0)
    marginals = [Pmf.from_probs(support, counts[t] / trials) for t in range(n)]
    max_div = max(
        divergence(total_variation(), p_tilde, marg) for marg in marginals
    )
    dv, budget = _perception_setup(
        perception_divergence, perception_budget, p_x, p_tilde, delta
    )
    violations = 0
    if dv is not None:
        word_divs = np.empty(len(cb))
        for m in range(len(cb)):
            gamma = Pmf.from_probs(
                support, np.bincount(cb.words[m], minlength=k_tgt) / n
            )
            word_divs[m] = divergence(dv, p_x, gamma)
        violations = int(np.sum(word_divs[m_star] > budget))
    return SimReport(
        n=n,
        trials=trials,
        rate_bits=cb.rate_bits,
        avg_distortion=avg_distortion,
        per_letter_marginals=marginals,
        max_perletter_divergence=float(max_div),
        perception_violations=violations,
        seed=seed,
        diagnostics={
            "mode": mode,
            "n0": n0,
            "codebook_words": len(cb),
            "seed_map_tv": seed_map.tv_to_uniform if seed_map else None,
            "perception_budget": budget,
            "reference_distortion": float(
                np.sum(p_x.probs[:, None] * target_channel.matrix[:, col_idx] * mat)
            ),
        },
    )


def _batch_encode(xs, words, mat, k_src, chunk_elems=50_000_000):
    """Min-distortion encoding of many blocks at once via one-hot products."""
    trials, n = xs.shape
    n_words = words.shape[0]
    word_costs = [mat[a][words] for a in range(k_src)]  # (M, n) each
    m_star = np.empty(trials, dtype=np.int64)
    best = np.empty(trials)
    step = max(1, chunk_elems // max(1, n_words))
    for start in range(0, trials, step):
        sl = slice(start, min(trials, start + step))
        totals = np.zeros((sl.stop - sl.start, n_words))
        for a in range(k_src):
            mask = (xs[sl] == a).astype(float)
            totals += mask @ word_costs[a].T
        m_star[sl] = np.argmin(totals, axis=1)
        best[sl] = totals[np.arange(sl.stop - sl.start), m_star[sl]]
    return m_star, best


def _perception_setup(dv, budget, p_x, p_tilde, delta):
    if dv is None:
        if p_x.labels == p_tilde.labels:
            dv = total_variation()
        else:
            try:
                p_x.real_values()
                p_tilde.real_values()
                dv = wasserstein_sq()
            except ValueError:
                return None, None
    if budget is None:
        budget = divergence(dv, p_x, p_tilde) + 2.0 * delta * len(p_tilde.atoms)
    return dv, float(budget)


# ---------------------------------------------------------------------------
# Soft covering
# ---------------------------------------------------------------------------


def soft_covering_tv(channel_out: Channel, cb: Codebook, p_x: Pmf) -> float:
    """Exact TV between the codebook-mixture output law and the i.i.d. law.

    Enumerates all |X|^n output sequences; the mixture is the uniform average
    over codewords of the product channel law.
    """
    if channel_out.inputs != cb.alphabet:
        raise ValueError("channel inputs must match the codebook alphabet")
    if channel_out.outputs != p_x.labels:
        raise ValueError("channel outputs must match the reference alphabet")
    n_x = len(p_x.atoms)
    if n_x**cb.n > MAX_ENUMERATION:
        raise ValueError("output space too large for exact enumeration")
    rows = channel_out.matrix
    p_out = np.zeros(n_x**cb.n)
    for m in range(len(cb)):
        v = np.ones(1)
        for t in range(cb.n):
            v = (v[:, None] * rows[cb.words[m, t]][None, :]).ravel()
        p_out += v
    p_out /= len(cb)
    prod = np.ones(1)
    for _ in range(cb.n):
        prod = (prod[:, None] * p_x.probs[None, :]).ravel()
    return float(0.5 * np.abs(p_out - prod).sum())


def empirical_perception_check(
    xhat_seq, p_x: Pmf, d: DivergenceSpec, budget: float
) -> bool:
    """True iff d(p_X, empirical law of the sequence) is within the budget."""
    if d.kind in (TV, KL):
        gamma = empirical_pmf(xhat_seq, p_x.labels)
    else:
        gamma = empirical_pmf(xhat_seq, sorted(set(xhat_seq)))
    return divergence(d, p_x, gamma) <= budget


# ---------------------------------------------------------------------------
# Per-letter private-randomness pipeline
# ---------------------------------------------------------------------------


def private_randomness_channel_sim(
    p_x: Pmf,
    channel: Channel,
    decoder: Channel,
    trials: int,
    seed: int = 0,
    dist=None,
) -> SimReport:
    """Simulate X -> V -> Xhat with independent private randomness per letter.

    When the decoder mirrors the posterior (p_{Xhat|V} = p_{X|V}), the output
    marginal reproduces the source.  Diagnostics sample, for each source
    symbol, the maximal coupling of the encoder row against the V-marginal
    and record the disagreement rate next to the exact total variation.
    """
    if channel.inputs != p_x.labels:
        raise ValueError("channel inputs must match the source alphabet")
    if decoder.inputs != channel.outputs:
        raise ValueError("decoder inputs must match the channel outputs")
    if dist is None:
        try:
            x_vals = p_x.real_values()
            y_vals = np.array([float(a) for a in decoder.outputs])
            mat = (x_vals[:, None] - y_vals[None, :]) ** 2
        except (ValueError, TypeError):
            if set(decoder.outputs) != set(p_x.labels):
                raise ValueError("provide a distortion for non-real alphabets")
            mat = np.array(
                [[0.0 if a == b else 1.0 for b in decoder.outputs] for a in p_x.labels]
            )
    else:
        mat = _distortion_matrix(dist, p_x.labels, decoder.outputs)
    gen = stream(seed, AUX_STREAM)
    x_idx = np.searchsorted(np.cumsum(p_x.probs), gen.random(trials), side="right")
    cum_enc = np.cumsum(channel.matrix, axis=1)
    v_idx = (gen.random(trials)[:, None] > cum_enc[x_idx]).sum(axis=1)
    cum_dec = np.cumsum(decoder.matrix, axis=1)
    xh_idx = (gen.random(trials)[:, None] > cum_dec[v_idx]).sum(axis=1)
    avg_d = float(np.mean(mat[x_idx, xh_idx]))
    counts = np.bincount(xh_idx, minlength=len(decoder.outputs))
    marginal = Pmf.from_probs(decoder.outputs, counts / trials)
    v_marginal = channel.push(p_x)
    diagnostics = {}
    diag_trials = min(trials, 200_000)
    for i, lab in enumerate(p_x.labels):
        row = channel.row(lab)
        coup = maximal_coupling(row, v_marginal)
        flat = coup.joint.ravel()
        flat = flat / flat.sum()
        draw = np.searchsorted(np.cumsum(flat), gen.random(diag_trials), side="right")
        k_v = len(v_marginal.atoms)
        mismatch = float(np.mean((draw // k_v) != (draw % k_v)))
        diagnostics[str(lab)] = {
            "tv": divergence(total_variation(), row, v_marginal),
            "mismatch_rate": mismatch,
            "pairs": diag_trials,
        }
    max_div = math.inf
    if set(decoder.outputs) == set(p_x.labels):
        reordered = Pmf.from_pairs(
            [(a, marginal.prob(a)) for a in p_x.labels]
        )
        max_div = divergence(total_variation(), p_x, reordered)
    return SimReport(
        n=1,
        trials=trials,
        rate_bits=0.0,
        avg_distortion=avg_d,
        per_letter_marginals=[marginal],
        max_perletter_divergence=float(max_div),
        perception_violations=0,
        seed=seed,
        diagnostics=diagnostics,
    )
