"""Seeded Monte-Carlo sweeps over SNR and carrier count, with CSV output.

A sweep point is one (carrier count, SNR) pair; every enabled scheme at a
point and trial consumes the *same* sampled instance, so scheme
comparisons are paired.  Trial seeds derive from
``SeedSequence((base_seed, point_index, trial))``, making every output
byte a function of the configuration alone.

Records stream out one per (point, trial, scheme, player) and serialize to
CSV with the fixed header::

    scheme,regime,snr_db,carriers,followers,trial,seed,player,utility,active_carrier,converged,verified

Floats are written with 12 significant digits; ``verified`` is filled for
the configurable fraction of trials that get re-certified by the deviation
oracles (equilibrium schemes only; the best-channel heuristic claims no
equilibrium property, so its records are never marked).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Iterable, Iterator, Optional

import numpy as np

from .baselines import solve_best_channel, solve_nash
from .dense import solve_dense
from .efficiency import EfficiencyModel
from .model import REGIMES, sample_instance
from .oracle import verify_follower, verify_leader_stackelberg, verify_nash
from .sparse import solve_sparse

__all__ = [
    "SCHEMES",
    "CSV_HEADER",
    "ScenarioConfig",
    "SweepRecord",
    "SummaryRow",
    "TrendStep",
    "PairedGap",
    "run_sweep",
    "write_records",
    "read_records",
    "summarize",
    "write_summary",
    "carrier_trend",
    "paired_gap",
    "load_config_file",
    "config_from_values",
    "parse_carrier_list",
    "parse_snr_points",
    "parse_rates",
]

SCHEMES = ("stackelberg", "nash", "best_channel")

CSV_HEADER = (
    "scheme,regime,snr_db,carriers,followers,trial,seed,player,"
    "utility,active_carrier,converged,verified"
)

_Z95 = 1.959963984540054


@dataclass(frozen=True)
class ScenarioConfig:
    """One sweep campaign: the cartesian product of carriers x SNR points.

    ``carriers`` may hold several counts (carrier-count sweeps); ``snr_db``
    holds the SNR points in dB.  ``rates`` is a scalar broadcast to all
    players or a length-(followers+1) tuple.
    """

    carriers: tuple = (5,)
    followers: int = 4
    m_exponent: int = 2
    mean_signal: float = 1.0
    mean_cross: float = 0.5
    snr_db: tuple = (-5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0)
    trials: int = 500
    seed: int = 1
    schemes: tuple = SCHEMES
    regime: str = "dense"
    rates: object = 1.0
    output_path: str = "sweep.csv"
    verify_fraction: float = 0.01
    verify_grid: int = 300

    def __post_init__(self):
        if not self.carriers or not self.snr_db:
            raise ValueError("carriers and snr_db must be nonempty")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.schemes:
            raise ValueError("at least one scheme is required")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}; choose from {SCHEMES}")
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}")
        for k in self.carriers:
            if k < self.followers + 1:
                raise ValueError(
                    f"carrier count {k} violates K >= F+1 with F={self.followers}"
                )
        if not 0.0 <= self.verify_fraction <= 1.0:
            raise ValueError("verify_fraction must lie in [0, 1]")

    def model(self) -> EfficiencyModel:
        return EfficiencyModel(m=self.m_exponent)


@dataclass(frozen=True)
class SweepRecord:
    """One CSV row; ``instance_digest`` is kept in memory only."""

    scheme: str
    regime: str
    snr_db: float
    carriers: int
    followers: int
    trial: int
    seed: int
    player: int
    utility: float
    active_carrier: Optional[int]
    converged: bool
    verified: str
    instance_digest: str = field(default="", compare=False)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _record_line(r: SweepRecord) -> str:
    return ",".join(
        (
            r.scheme,
            r.regime,
            _fmt(r.snr_db),
            str(r.carriers),
            str(r.followers),
            str(r.trial),
            str(r.seed),
            str(r.player),
            _fmt(r.utility),
            "" if r.active_carrier is None else str(r.active_carrier),
            "true" if r.converged else "false",
            r.verified,
        )
    )


def run_scheme(scheme: str, instance, model, regime: str):
    """Dispatch one scheme; returns (result, converged flag)."""
    if scheme == "stackelberg":
        result = solve_sparse(instance, model) if regime == "sparse" else solve_dense(
            instance, model
        )
        return result, True
    if scheme == "nash":
        result, report = solve_nash(instance, model, regime)
        return result, report.converged
    if scheme == "best_channel":
        result, report = solve_best_channel(instance, model, regime)
        return result, report.converged
    raise ValueError(f"unknown scheme {scheme!r}")


def _verification_verdicts(scheme, instance, model, result, regime, grid) -> dict:
    """Per-player pass/fail strings for the schemes that claim equilibria."""
    verdicts: dict = {}
    if scheme == "stackelberg":
        leader = verify_leader_stackelberg(
            instance, model, result.allocation, regime, grid_size=grid
        )
        verdicts[0] = "pass" if leader.passed else "fail"
        for f in range(instance.followers):
            rep = verify_follower(instance, model, f, result.allocation, grid_size=grid)
            verdicts[f + 1] = "pass" if rep.passed else "fail"
    elif scheme == "nash":
        for rep in verify_nash(instance, model, result.allocation, regime, grid_size=grid):
            verdicts[rep.player] = "pass" if rep.passed else "fail"
    return verdicts


def run_sweep(config: ScenarioConfig) -> Iterator[SweepRecord]:
    """Run the campaign, yielding records in deterministic order."""
    model = config.model()
    point_index = 0
    for carriers in config.carriers:
        for snr_db in config.snr_db:
            for trial in range(config.trials):
                seq = np.random.SeedSequence((config.seed, point_index, trial))
                words = seq.generate_state(2)
                trial_seed = int(words[0])
                do_verify = words[1] / 2.0**32 < config.verify_fraction
                instance = sample_instance(
                    carriers,
                    config.followers,
                    mean_signal=config.mean_signal,
                    mean_cross=config.mean_cross,
                    snr_db=snr_db,
                    rates=config.rates,
                    seed=trial_seed,
                )
                digest = instance.digest()
                for scheme in config.schemes:
                    try:
                        result, converged = run_scheme(scheme, instance, model, config.regime)
                    except Exception:
                        # record the failure, keep sweeping
                        for player in range(config.followers + 1):
                            yield SweepRecord(
                                scheme, config.regime, snr_db, carriers,
                                config.followers, trial, trial_seed, player,
                                math.nan, None, False, "", digest,
                            )
                        continue
                    verdicts = (
                        _verification_verdicts(
                            scheme, instance, model, result, config.regime,
                            config.verify_grid,
                        )
                        if do_verify
                        else {}
                    )
                    for player in range(instance.players):
                        yield SweepRecord(
                            scheme=scheme,
                            regime=config.regime,
                            snr_db=snr_db,
                            carriers=carriers,
                            followers=config.followers,
                            trial=trial,
                            seed=trial_seed,
                            player=player,
                            utility=float(result.utilities[player]),
                            active_carrier=result.active_carriers[player],
                            converged=converged,
                            verified=verdicts.get(player, ""),
                            instance_digest=digest,
                        )
            point_index += 1


def write_records(records: Iterable[SweepRecord], path) -> int:
    """Serialize records to CSV (newline-terminated); returns row count."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for record in records:
            fh.write(_record_line(record) + "\n")
            count += 1
    return count


def read_records(path) -> list[SweepRecord]:
    """Parse a sweep CSV back into records (digests are not recoverable)."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header: {header!r}")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if len(parts) != 12:
                raise ValueError(f"malformed CSV row: {line!r}")
            records.append(
                SweepRecord(
                    scheme=parts[0],
                    regime=parts[1],
                    snr_db=float(parts[2]),
                    carriers=int(parts[3]),
                    followers=int(parts[4]),
                    trial=int(parts[5]),
                    seed=int(parts[6]),
                    player=int(parts[7]),
                    utility=float(parts[8]),
                    active_carrier=None if parts[9] == "" else int(parts[9]),
                    converged=parts[10] == "true",
                    verified=parts[11],
                )
            )
    return records


@dataclass(frozen=True)
class SummaryRow:
    """Aggregates for one (scheme, point) group.

    Follower statistics average the per-trial mean follower utility;
    ``ci95`` columns are normal-approximation half-widths.
    """

    scheme: str
    regime: str
    snr_db: float
    carriers: int
    followers: int
    trials: int
    leader_mean: float
    leader_std: float
    leader_ci95: float
    follower_mean: float
    follower_std: float
    follower_ci95: float
    convergence_rate: float


def _stats(values: np.ndarray) -> tuple:
    values = values[np.isfinite(values)]
    if values.size == 0:
        return math.nan, math.nan, math.nan
    mean = float(values.mean())
    std = float(values.std())
    return mean, std, _Z95 * std / math.sqrt(values.size)


def summarize(records: Iterable[SweepRecord]) -> list[SummaryRow]:
    """Aggregate records into per-(scheme, point) rows, input order kept."""
    groups: dict = {}
    for r in records:
        key = (r.scheme, r.regime, r.snr_db, r.carriers, r.followers)
        trialmap = groups.setdefault(key, {})
        entry = trialmap.setdefault(r.trial, {"followers": [], "leader": math.nan, "converged": True})
        if r.player == 0:
            entry["leader"] = r.utility
            entry["converged"] = r.converged
        else:
            entry["followers"].append(r.utility)
    if not groups:
        raise ValueError("no records to summarize")
    rows = []
    for key, trialmap in groups.items():
        leaders = np.array([t["leader"] for t in trialmap.values()])
        follower_means = np.array(
            [np.mean(t["followers"]) if t["followers"] else math.nan for t in trialmap.values()]
        )
        converged = np.array([t["converged"] for t in trialmap.values()])
        lm, ls, lc = _stats(leaders)
        fm, fs, fc = _stats(follower_means)
        rows.append(
            SummaryRow(
                scheme=key[0],
                regime=key[1],
                snr_db=key[2],
                carriers=key[3],
                followers=key[4],
                trials=len(trialmap),
                leader_mean=lm,
                leader_std=ls,
                leader_ci95=lc,
                follower_mean=fm,
                follower_std=fs,
                follower_ci95=fc,
                convergence_rate=float(converged.mean()),
            )
        )
    return rows


SUMMARY_HEADER = (
    "scheme,regime,snr_db,carriers,followers,trials,leader_mean,leader_std,"
    "leader_ci95,follower_mean,follower_std,follower_ci95,convergence_rate"
)


def write_summary(rows: list[SummaryRow], fh) -> None:
    fh.write(SUMMARY_HEADER + "\n")
    for r in rows:
        fh.write(
            ",".join(
                (
                    r.scheme,
                    r.regime,
                    _fmt(r.snr_db),
                    str(r.carriers),
                    str(r.followers),
                    str(r.trials),
                    _fmt(r.leader_mean),
                    _fmt(r.leader_std),
                    _fmt(r.leader_ci95),
                    _fmt(r.follower_mean),
                    _fmt(r.follower_std),
                    _fmt(r.follower_ci95),
                    _fmt(r.convergence_rate),
                )
            )
            + "\n"
        )


@dataclass(frozen=True)
class TrendStep:
    """One carrier-count increment of the utility-versus-K trend check.

    The step is accepted when the mean does not drop by more than the two
    half-widths combined.
    """

    carriers_from: int
    carriers_to: int
    mean_from: float
    mean_to: float
    slack: float
    ok: bool


def carrier_trend(
    rows: list[SummaryRow], *, scheme: str, side: str = "leader"
) -> list[TrendStep]:
    """Check that mean utility is non-decreasing in the carrier count."""
    if side not in ("leader", "follower"):
        raise ValueError("side must be 'leader' or 'follower'")
    picked = sorted((r for r in rows if r.scheme == scheme), key=lambda r: r.carriers)
    steps = []
    for a, b in zip(picked, picked[1:]):
        mean_a = a.leader_mean if side == "leader" else a.follower_mean
        mean_b = b.leader_mean if side == "leader" else b.follower_mean
        ci_a = a.leader_ci95 if side == "leader" else a.follower_ci95
        ci_b = b.leader_ci95 if side == "leader" else b.follower_ci95
        slack = ci_a + ci_b
        steps.append(
            TrendStep(
                carriers_from=a.carriers,
                carriers_to=b.carriers,
                mean_from=mean_a,
                mean_to=mean_b,
                slack=slack,
                ok=bool(mean_b >= mean_a - slack),
            )
        )
    return steps


@dataclass(frozen=True)
class PairedGap:
    """Mean per-trial utility gap (scheme_a - scheme_b) at one point."""

    snr_db: float
    carriers: int
    trials: int
    mean_gap: float
    ci95: float


def paired_gap(
    records: Iterable[SweepRecord],
    scheme_a: str,
    scheme_b: str,
    *,
    player: int = 0,
    converged_only: bool = True,
) -> list[PairedGap]:
    """Paired comparison of two schemes on their shared instances."""
    table: dict = {}
    for r in records:
        if r.player != player or r.scheme not in (scheme_a, scheme_b):
            continue
        point = (r.snr_db, r.carriers)
        table.setdefault(point, {}).setdefault(r.trial, {})[r.scheme] = r
    out = []
    for (snr_db, carriers), trials in table.items():
        gaps = []
        for pair in trials.values():
            if scheme_a not in pair or scheme_b not in pair:
                continue
            if converged_only and not (pair[scheme_a].converged and pair[scheme_b].converged):
                continue
            gaps.append(pair[scheme_a].utility - pair[scheme_b].utility)
        if not gaps:
            continue
        arr = np.array(gaps)
        std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        out.append(
            PairedGap(
                snr_db=snr_db,
                carriers=carriers,
                trials=arr.size,
                mean_gap=float(arr.mean()),
                ci95=_Z95 * std / math.sqrt(arr.size),
            )
        )
    return out


def load_config_file(path) -> dict:
    """Parse a flat ``key=value`` config file ('#' starts a comment)."""
    values: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def parse_carrier_list(text: str) -> tuple:
    return tuple(int(part) for part in text.split(",") if part.strip() != "")


def parse_snr_points(text: str) -> tuple:
    """Accept 'start:stop:step', a single value, or a comma list (dB)."""
    if ":" in text:
        start, stop, step = (float(p) for p in text.split(":"))
        if step <= 0:
            raise ValueError("SNR step must be positive")
        points = []
        value = start
        while value <= stop + 1e-9:
            points.append(round(value, 12))
            value += step
        return tuple(points)
    return tuple(float(p) for p in text.split(",") if p.strip() != "")


def parse_rates(text: str):
    parts = [float(p) for p in text.split(",") if p.strip() != ""]
    return parts[0] if len(parts) == 1 else tuple(parts)


_PARSERS = {
    "carriers": parse_carrier_list,
    "followers": int,
    "m_exponent": int,
    "mean_signal": float,
    "mean_cross": float,
    "snr_db": parse_snr_points,
    "trials": int,
    "seed": int,
    "schemes": lambda s: tuple(p.strip() for p in s.split(",") if p.strip()),
    "regime": str,
    "rates": parse_rates,
    "output_path": str,
    "verify_fraction": float,
    "verify_grid": int,
}


def config_from_values(file_values: dict, overrides: dict) -> ScenarioConfig:
    """Build a config from file values with CLI overrides on top."""
    known = {f.name for f in fields(ScenarioConfig)}
    merged: dict = {}
    for key, raw in file_values.items():
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        merged[key] = _PARSERS[key](raw) if isinstance(raw, str) else raw
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    return ScenarioConfig(**merged)
