"""End-to-end Monte Carlo engine for the keyed-constellation link.

Quadrature convention: x = (a + a^dag)/2, vacuum variance 1/4 per
quadrature.  Homodyne sees that vacuum noise directly; heterodyne pays
one extra vacuum unit, i.e. variance 1/2 per quadrature.  With this
convention the antipodal BERs are 1/2 erfc(sqrt(2S)) and 1/2 erfc(sqrt(S)).

Trials run in fixed batches of 65536; batch i draws from an RNG stream
keyed by (master_seed, i), so results are bit-identical regardless of
how many workers execute the batches.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .cipher import Constellation, KeystreamGen
from .fock import CoherentVec, coherent_amplitudes, phase_distribution, wrap_angle
from .receivers import (
    ReceiverModel,
    canonical_phase_antipodal,
    helstrom_pure_antipodal,
    heterodyne_antipodal,
    homodyne_antipodal,
)

BATCH_SIZE = 1 << 16
WILSON_Z99 = 2.5758293035489004  # two-sided 99% normal quantile

EVE_STRATEGIES = ("heterodyne-deferred", "phase-deferred", "nearest-point", "none")


def wilson_interval(errors: int, trials: int, z: float = WILSON_Z99) -> tuple[float, float]:
    """Wilson score interval; stays valid at extreme error probabilities."""
    if trials < 1 or not 0 <= errors <= trials:
        raise ValueError("need 0 <= errors <= trials, trials >= 1")
    p_hat = errors / trials
    denom = 1.0 + z * z / trials
    center = (p_hat + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p_hat * (1.0 - p_hat) / trials + z * z / (4.0 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class BerEstimate:
    errors: int
    trials: int
    p_hat: float
    ci_low: float
    ci_high: float

    @classmethod
    def from_counts(cls, errors: int, trials: int) -> "BerEstimate":
        low, high = wilson_interval(errors, trials)
        return cls(errors, trials, errors / trials, low, high)

    def to_dict(self) -> dict:
        return {"errors": self.errors, "trials": self.trials, "p_hat": self.p_hat,
                "ci_low": self.ci_low, "ci_high": self.ci_high}


@dataclass(frozen=True)
class SimConfig:
    s: float
    m_bases: int
    mapping: str = "alternating"
    seed_key: str = "deadbeef"
    bob_receiver: ReceiverModel = field(default_factory=lambda: ReceiverModel("heterodyne"))
    eve_strategy: str = "none"
    trials: int = 100_000
    master_seed: int = 0
    dsr_d: int = 0

    def validate(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not math.isfinite(self.s) or self.s < 0:
            raise ValueError("S must be finite and >= 0")
        if self.eve_strategy not in EVE_STRATEGIES:
            raise ValueError(f"unknown eve strategy {self.eve_strategy!r}")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.dsr_d and not 0 <= self.dsr_d < self.m_bases / 2:
            raise ValueError(f"dsr_d={self.dsr_d} must satisfy 0 <= d < M/2")
        if self.dsr_d and self.bob_receiver.kind == "optimal":
            raise ValueError("analytic-flip Bob cannot be combined with DSR "
                             "(the flip probability is no longer valid)")
        Constellation(self.m_bases, self.mapping)  # raises on bad M / mapping

    def to_dict(self) -> dict:
        return {
            "s": self.s, "m_bases": self.m_bases, "mapping": self.mapping,
            "seed_key": self.seed_key,
            "bob_receiver": {"kind": self.bob_receiver.kind,
                             "resolution": self.bob_receiver.resolution},
            "eve_strategy": self.eve_strategy, "trials": self.trials,
            "master_seed": self.master_seed, "dsr_d": self.dsr_d,
        }


@dataclass(frozen=True)
class TrialReport:
    config: SimConfig
    bob: BerEstimate
    eve: BerEstimate | None
    analytic_bob: float
    analytic_eve: float | None

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "bob": self.bob.to_dict(),
            "eve": self.eve.to_dict() if self.eve is not None else None,
            "analytic_bob": self.analytic_bob,
            "analytic_eve": self.analytic_eve,
        }


def sample_heterodyne(s: float, phi, rng: np.random.Generator, size: int | None = None):
    """Heterodyne outcome z = sqrt(S) e^{i phi} + g, Var(Re g) = Var(Im g) = 1/2."""
    mean = math.sqrt(s) * np.exp(1j * np.asarray(phi))
    noise = rng.normal(scale=math.sqrt(0.5), size=size) \
        + 1j * rng.normal(scale=math.sqrt(0.5), size=size)
    return mean + noise


def sample_homodyne(s: float, phi_signal, phi_lo, rng: np.random.Generator,
                    size: int | None = None):
    """Homodyne outcome x = sqrt(S) cos(phi_signal - phi_lo) + g, Var g = 1/4."""
    mean = math.sqrt(s) * np.cos(np.asarray(phi_signal) - np.asarray(phi_lo))
    return mean + rng.normal(scale=0.5, size=size)


class PhaseSampler:
    """Inverse-CDF sampler for the canonical phase distribution of a state."""

    def __init__(self, v: CoherentVec, resolution: int = 1 << 16):
        dist = phase_distribution(v, resolution)
        mass = dist.density * dist.spacing
        cdf = np.concatenate(([0.0], np.cumsum(mass)))
        cdf /= cdf[-1]
        self._cdf = cdf
        self._edges = np.linspace(-np.pi, np.pi, resolution + 1)

    def sample(self, rng: np.random.Generator, size: int | None = None):
        return np.interp(rng.random(size), self._cdf, self._edges)


def sample_phase(v: CoherentVec, rng: np.random.Generator, size: int | None = None,
                 resolution: int = 1 << 16):
    """Draw canonical-phase outcomes for state v (builds a sampler per call)."""
    return PhaseSampler(v, resolution).sample(rng, size)


def _analytic_ber(kind: str, s: float, resolution: int) -> float:
    if kind == "optimal":
        return helstrom_pure_antipodal(s).exact
    if kind == "heterodyne":
        return heterodyne_antipodal(s).exact
    if kind == "homodyne":
        return homodyne_antipodal(s).exact
    if kind == "phase":
        return canonical_phase_antipodal(s, resolution).exact
    raise ValueError(kind)


def _run_batch(cfg: SimConfig, const: Constellation, sampler: PhaseSampler | None,
               bases: np.ndarray, p_flip: float, batch: int) -> tuple[int, int]:
    m_count = cfg.m_bases
    lo = batch * BATCH_SIZE
    hi = min(lo + BATCH_SIZE, cfg.trials)
    n = hi - lo
    rng = np.random.default_rng(np.random.SeedSequence([cfg.master_seed, batch]))

    m = bases[lo:hi]
    bits = rng.integers(0, 2, size=n, dtype=np.int64)
    pol = (m & 1) if const.alternating else np.zeros(n, dtype=np.int64)
    j = m + (bits ^ pol) * m_count
    if cfg.dsr_d:
        j = (j + rng.integers(-cfg.dsr_d, cfg.dsr_d + 1, size=n)) % (2 * m_count)
    theta_j = np.pi * j / m_count
    theta_m = np.pi * m / m_count

    kind = cfg.bob_receiver.kind
    if kind == "optimal":
        bob_bits = bits ^ (rng.random(n) < p_flip)
    else:
        if kind == "heterodyne":
            z = sample_heterodyne(cfg.s, theta_j, rng, n)
            raw = np.real(z * np.exp(-1j * theta_m)) < 0
        elif kind == "homodyne":
            raw = sample_homodyne(cfg.s, theta_j, theta_m, rng, n) < 0
        else:  # phase
            phi_hat = wrap_angle(sampler.sample(rng, n) + theta_j)
            raw = np.cos(phi_hat - theta_m) < 0
        bob_bits = raw.astype(np.int64) ^ pol
    bob_err = int(np.count_nonzero(bob_bits != bits))

    eve_err = 0
    if cfg.eve_strategy != "none":
        if cfg.eve_strategy == "heterodyne-deferred":
            z = sample_heterodyne(cfg.s, theta_j, rng, n)
            raw = np.real(z * np.exp(-1j * theta_m)) < 0
            eve_bits = raw.astype(np.int64) ^ pol
        elif cfg.eve_strategy == "phase-deferred":
            phi_hat = wrap_angle(sampler.sample(rng, n) + theta_j)
            raw = np.cos(phi_hat - theta_m) < 0
            eve_bits = raw.astype(np.int64) ^ pol
        else:  # nearest-point: never learns the key, snaps to the closest point
            phi_hat = wrap_angle(sampler.sample(rng, n) + theta_j)
            j_hat = np.rint(phi_hat * m_count / np.pi).astype(np.int64) % (2 * m_count)
            eve_bits = j_hat // m_count
            if const.alternating:
                eve_bits = eve_bits ^ ((j_hat % m_count) & 1)
        eve_err = int(np.count_nonzero(eve_bits != bits))
    return bob_err, eve_err


def run_simulation(cfg: SimConfig, workers: int = 1) -> TrialReport:
    """Simulate cfg.trials symbols; deterministic for a fixed master_seed."""
    cfg.validate()
    if workers < 1:
        raise ValueError("workers must be >= 1")
    const = Constellation(cfg.m_bases, cfg.mapping)
    gen = KeystreamGen.from_hex(cfg.seed_key)
    bases = gen.bases(cfg.m_bases, cfg.trials)

    needs_phase = cfg.bob_receiver.kind == "phase" or \
        cfg.eve_strategy in ("phase-deferred", "nearest-point")
    sampler = PhaseSampler(coherent_amplitudes(cfg.s, 0.0)) if needs_phase else None
    p_flip = helstrom_pure_antipodal(cfg.s).exact

    n_batches = (cfg.trials + BATCH_SIZE - 1) // BATCH_SIZE
    task = partial(_run_batch, cfg, const, sampler, bases, p_flip)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(task, range(n_batches)))
    else:
        counts = [task(b) for b in range(n_batches)]
    bob_err = sum(c[0] for c in counts)
    eve_err = sum(c[1] for c in counts)

    analytic_bob = _analytic_ber(cfg.bob_receiver.kind, cfg.s, cfg.bob_receiver.resolution)
    analytic_eve = None
    if cfg.eve_strategy == "heterodyne-deferred":
        analytic_eve = heterodyne_antipodal(cfg.s).exact
    elif cfg.eve_strategy == "phase-deferred":
        analytic_eve = canonical_phase_antipodal(cfg.s).exact

    eve = BerEstimate.from_counts(eve_err, cfg.trials) if cfg.eve_strategy != "none" else None
    return TrialReport(cfg, BerEstimate.from_counts(bob_err, cfg.trials), eve,
                       analytic_bob, analytic_eve)
