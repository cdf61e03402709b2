"""End-to-end orchestration: generate -> blind -> acquire -> summarize -> unblind -> fit.

Seed policy: one master seed per RunConfig; sub-streams are derived by
hashing (seed, label) for bit generation per source, the blinding
permutation, acquisition noise, and Monte Carlo resampling. Changing the
Monte Carlo realization count therefore never perturbs the acquired data.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import analysis, blinding, signal, sources
from .config import RunConfig
from .seeds import derive_rng, derive_seed


@dataclass(frozen=True)
class BlindedSummary:
    low: analysis.GaussianSummary
    high: analysis.GaussianSummary
    low_hist: analysis.HistogramResult
    n_total: int


@dataclass(frozen=True)
class UnblindResult:
    per_source_low: dict  # source_id -> GaussianSummary of low readings
    per_source_hist: dict  # source_id -> HistogramResult of low readings
    points: tuple  # RegressionPoints ordered as config sources
    fit: analysis.FitResult
    mc: analysis.MCResult


def generate_bits(config: RunConfig) -> list[sources.BitString]:
    """One bit string per configured source, each from its own derived stream."""
    out = []
    for spec in config.sources:
        rng = derive_rng(config.seed, "bits", spec.id)
        if spec.kind is sources.SourceKind.CLASSICAL:
            out.append(sources.generate_classical(spec.id, spec.count, rng))
        else:
            out.append(sources.generate_qubit(spec.id, spec.count, spec.fidelity, rng))
    return out


def blind(config: RunConfig, strings: Sequence[sources.BitString]):
    rng = derive_rng(config.seed, "blinding")
    return blinding.combine_and_permute(
        strings, rng, seed_descriptor=f"{config.seed}/blinding"
    )


def acquire(
    config: RunConfig,
    blinded_bits: np.ndarray,
    key: blinding.BlindingKey,
) -> list[signal.CycleReading]:
    """Simulate the acquisition; the key is provenance for the simulator only."""
    fidelity_of = {s.id: s.fidelity for s in config.sources}
    fidelities = np.array([fidelity_of[sid] for sid, _ in key.entries])
    noise_seed = derive_seed(config.seed, "noise")
    return signal.run_acquisition(
        blinded_bits, fidelities, config.params, config.acquisition, noise_seed
    )


def blinded_summary(
    readings: Sequence[signal.CycleReading], config: RunConfig
) -> BlindedSummary:
    """Pooled low/high statistics; operates on blinded readings only, never the key."""
    values = [r.reading for r in readings]
    if not values:
        raise ValueError("no readings to summarize")
    low, high = analysis.classify(values, config.analysis.threshold)
    return BlindedSummary(
        low=analysis.summarize(low),
        high=analysis.summarize(high),
        low_hist=analysis.histogram(low, config.analysis.n_bins),
        n_total=len(values),
    )


def unblind_fit(
    readings: Sequence[signal.CycleReading],
    key: blinding.BlindingKey,
    config: RunConfig,
) -> UnblindResult:
    """Per-source low-voltage statistics, weighted fit, MC errors, and the bound."""
    grouped = blinding.unblind(readings, key)
    per_low: dict[str, analysis.GaussianSummary] = {}
    per_hist: dict[str, analysis.HistogramResult] = {}
    points = []
    for spec in config.sources:
        if spec.id not in grouped:
            raise ValueError(f"key contains no entries for configured source {spec.id!r}")
        low, _ = analysis.classify(grouped[spec.id], config.analysis.threshold)
        summary = analysis.summarize(low)
        per_low[spec.id] = summary
        per_hist[spec.id] = analysis.histogram(low, config.analysis.n_bins)
        points.append(
            analysis.RegressionPoint(
                x=spec.fidelity - 0.5, y=summary.mean, sigma=summary.sem, label=spec.id
            )
        )
    fit = analysis.wls_fit(points, v1=config.params.v1)
    mc = analysis.mc_errors(
        points,
        derive_rng(config.seed, "mc"),
        n_real=config.analysis.mc_realizations,
    )
    bound = analysis.confidence_bound(
        fit.eps,
        fit.sigma_eps,
        cl=config.analysis.cl,
        rule=config.analysis.bound_rule,
        rng=derive_rng(config.seed, "bound"),
    )
    fit = analysis.with_bound(fit, bound, mc_realizations=mc.n_realizations)
    return UnblindResult(
        per_source_low=per_low,
        per_source_hist=per_hist,
        points=tuple(points),
        fit=fit,
        mc=mc,
    )


def run_pipeline(config: RunConfig):
    """Full in-memory run; returns (readings, key, blinded summary, unblind result)."""
    strings = generate_bits(config)
    blinded_bits, key = blind(config, strings)
    readings = acquire(config, blinded_bits, key)
    summary = blinded_summary(readings, config)
    result = unblind_fit(readings, key, config)
    return readings, key, summary, result
