"""Instance generation, benchmark orchestration, CSV persistence, DOT output."""

from __future__ import annotations

import csv
import hashlib
import statistics
import time
from dataclasses import dataclass, field

from .baselines import FAMILIES, baseline_stats, optimize_baseline
from .bounds import ORACLE_MAX_INPUTS, ORACLE_MAX_SPREAD, exact_optimum, lower_bound
from .core import (
    AopInstance,
    Circuit,
    GateNode,
    InputNode,
    InvariantViolation,
    ValidationError,
    node_arrivals,
    weight_log2,
)
from .optimizer import MODE_DELAY_SIZE, optimize
from .verify import verify_against_instance

VERIFY_MAX_INPUTS = 12


@dataclass(frozen=True)
class BenchConfig:
    m_min: int = 4
    m_max: int = 28
    count: int = 1000  # instances per input count
    seed: int = 1
    baselines: tuple[str, ...] = FAMILIES
    with_size_mode: bool = True
    m_ceiling: int = 28

    def __post_init__(self):
        if not 1 <= self.m_min <= self.m_max <= self.m_ceiling:
            raise ValidationError(
                f"need 1 <= m_min <= m_max <= {self.m_ceiling}, got "
                f"[{self.m_min}, {self.m_max}]"
            )
        if self.count < 1:
            raise ValidationError("count must be at least 1")
        for fam in self.baselines:
            if fam not in FAMILIES:
                raise ValidationError(f"unknown baseline family {fam!r}")


# Instance seeds are derived as seed * 2**40 + m * 2**20 + idx and fed to the
# stdlib Mersenne Twister; arrivals are randint(0, m), both bounds inclusive.
_SEED_M_STRIDE = 1 << 20
_SEED_STRIDE = 1 << 40


def instance_seed(seed: int, m: int, idx: int) -> int:
    return seed * _SEED_STRIDE + m * _SEED_M_STRIDE + idx


def gen_instance(seed: int, m: int, idx: int) -> AopInstance:
    import random

    rng = random.Random(instance_seed(seed, m, idx))
    return AopInstance(tuple(float(rng.randint(0, m)) for _ in range(m)), "g")


def gen_instances(cfg: BenchConfig):
    """Deterministic instance stream ordered by (m, idx)."""
    for m in range(cfg.m_min, cfg.m_max + 1):
        for idx in range(cfg.count):
            yield m, idx, gen_instance(cfg.seed, m, idx)


def instance_hash(inst: AopInstance) -> str:
    text = f"{inst.m}:{','.join(repr(a) for a in inst.arrivals)}:{inst.variant}"
    return hashlib.sha1(text.encode()).hexdigest()[:12]


def csv_columns(cfg: BenchConfig) -> list[str]:
    cols = ["m", "idx", "inst_hash", "w_log2", "lb", "oracle_delay"]
    cols += ["dp_delay", "dp_size", "dp_us"]
    if cfg.with_size_mode:
        cols += ["ds_delay", "ds_size", "ds_us"]
    for fam in cfg.baselines:
        cols += [f"{fam}_delay", f"{fam}_size", f"{fam}_us"]
    return cols


def _us(t0: float) -> int:
    return int(round((time.perf_counter() - t0) * 1e6))


def bench_instance(cfg: BenchConfig, m: int, idx: int, inst: AopInstance) -> dict:
    """One benchmark row; raises InvariantViolation on any ordering breach."""
    row: dict = {
        "m": m,
        "idx": idx,
        "inst_hash": instance_hash(inst),
        "w_log2": round(weight_log2(inst.arrivals), 6),
    }
    lb = lower_bound(inst).combined
    row["lb"] = lb
    t0 = time.perf_counter()
    dp = optimize(inst)
    row["dp_delay"], row["dp_size"], row["dp_us"] = dp.delay, dp.size, _us(t0)
    if dp.delay < lb:
        raise InvariantViolation(f"dp delay {dp.delay} below lower bound {lb} ({row})")
    if m <= VERIFY_MAX_INPUTS:
        rep = verify_against_instance(dp.circuit, inst)
        if not (rep.structural_ok and rep.equivalent):
            raise InvariantViolation(f"dp circuit failed verification ({row})")
    row["oracle_delay"] = ""
    if m <= ORACLE_MAX_INPUTS and inst.spread <= ORACLE_MAX_SPREAD:
        oracle = exact_optimum(inst)
        if not lb <= oracle <= dp.delay:
            raise InvariantViolation(
                f"oracle {oracle} outside [lb={lb}, dp={dp.delay}] ({row})"
            )
        row["oracle_delay"] = oracle
    if cfg.with_size_mode:
        t0 = time.perf_counter()
        ds = optimize(inst, MODE_DELAY_SIZE)
        row["ds_delay"], row["ds_size"], row["ds_us"] = ds.delay, ds.size, _us(t0)
        if ds.delay != dp.delay:
            raise InvariantViolation(
                f"size mode changed delay {dp.delay} -> {ds.delay} ({row})"
            )
        if ds.size > dp.size:
            raise InvariantViolation(
                f"size mode grew size {dp.size} -> {ds.size} ({row})"
            )
        if m <= VERIFY_MAX_INPUTS:
            rep = verify_against_instance(ds.circuit, inst)
            if not (rep.structural_ok and rep.equivalent):
                raise InvariantViolation(f"size-mode circuit failed verification ({row})")
    for fam in cfg.baselines:
        t0 = time.perf_counter()
        if m <= VERIFY_MAX_INPUTS:
            res = optimize_baseline(inst, fam)
            delay, size = res.delay, res.size
            rep = verify_against_instance(res.circuit, inst)
            if not (rep.structural_ok and rep.equivalent):
                raise InvariantViolation(f"{fam} circuit failed verification ({row})")
        else:
            delay, size = baseline_stats(inst, fam)
        row[f"{fam}_delay"], row[f"{fam}_size"], row[f"{fam}_us"] = delay, size, _us(t0)
        if dp.delay > delay:
            raise InvariantViolation(
                f"dp delay {dp.delay} worse than {fam} {delay} ({row})"
            )
    return row


def summarize(cfg: BenchConfig, records: list[dict]) -> dict:
    """Per-m aggregate statistics, recomputable from the raw rows."""
    per_m: dict[int, dict] = {}
    for m in sorted({r["m"] for r in records}):
        rows = [r for r in records if r["m"] == m]
        entry: dict = {"count": len(rows)}
        entry["lb_match_rate"] = sum(r["dp_delay"] == r["lb"] for r in rows) / len(rows)
        if cfg.baselines:
            gains = [
                min(r[f"{f}_delay"] for f in cfg.baselines) - r["dp_delay"]
                for r in rows
            ]
            entry["median_gain"] = statistics.median(gains)
            entry["mean_gain"] = statistics.mean(gains)
            size_key = "ds_size" if cfg.with_size_mode else "dp_size"
            overheads = [
                (r[size_key] - best) / best
                for r in rows
                if (best := min(r[f"{f}_size"] for f in cfg.baselines)) > 0
            ]
            entry["mean_size_overhead_pct"] = (
                100.0 * statistics.mean(overheads) if overheads else 0.0
            )
        eligible = [r for r in rows if r["oracle_delay"] != ""]
        if eligible:
            entry["oracle_count"] = len(eligible)
            entry["oracle_match_rate"] = sum(
                r["dp_delay"] == r["oracle_delay"] for r in eligible
            ) / len(eligible)
            entry["oracle_max_gap"] = max(
                r["dp_delay"] - r["oracle_delay"] for r in eligible
            )
        per_m[m] = entry
    return per_m


@dataclass
class BenchResult:
    config: BenchConfig
    records: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def run_bench(cfg: BenchConfig, csv_path=None, progress=None) -> BenchResult:
    """Run the benchmark; optionally stream rows to a CSV file."""
    records = []
    for m in range(cfg.m_min, cfg.m_max + 1):
        t0 = time.perf_counter()
        for idx in range(cfg.count):
            records.append(bench_instance(cfg, m, idx, gen_instance(cfg.seed, m, idx)))
        if progress is not None:
            progress(f"m={m}: {cfg.count} instances in {time.perf_counter() - t0:.1f}s")
    result = BenchResult(cfg, records, summarize(cfg, records))
    if csv_path is not None:
        write_csv(cfg, records, csv_path)
    return result


def write_csv(cfg: BenchConfig, records: list[dict], path) -> None:
    cols = csv_columns(cfg)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=cols)
        writer.writeheader()
        for row in records:
            writer.writerow({c: row.get(c, "") for c in cols})


def format_summary(summary: dict) -> str:
    lines = []
    for m, entry in sorted(summary.items()):
        bits = [f"m={m:>2}", f"n={entry['count']}"]
        bits.append(f"lb_match={entry['lb_match_rate']:.3f}")
        if "median_gain" in entry:
            bits.append(f"median_gain={entry['median_gain']:g}")
            bits.append(f"mean_gain={entry['mean_gain']:.3f}")
            bits.append(f"size_overhead={entry['mean_size_overhead_pct']:.1f}%")
        if "oracle_match_rate" in entry:
            bits.append(f"oracle_match={entry['oracle_match_rate']:.3f}")
        lines.append("  ".join(bits))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# DOT output


def emit_dot(c: Circuit) -> str:
    """Deterministic DOT rendering; inputs ranked at the source side."""
    arr = node_arrivals(c)
    lines = ["digraph circuit {", "  rankdir=LR;"]
    inputs = [i for i, n in enumerate(c.nodes) if isinstance(n, InputNode)]
    if inputs:
        lines.append("  { rank=source; " + "; ".join(f"n{i}" for i in inputs) + "; }")
    for nid, node in enumerate(c.nodes):
        if isinstance(node, InputNode):
            label = f"t{node.index}@{node.arrival:g}"
            lines.append(f'  n{nid} [shape=box label="{label}"];')
        else:
            lines.append(f'  n{nid} [shape=ellipse label="{node.kind}@{arr[nid]:g}"];')
    for nid, node in enumerate(c.nodes):
        if isinstance(node, GateNode):
            for p in node.preds:
                lines.append(f"  n{p} -> n{nid};")
    lines.append(f'  n{c.output} [peripheries=2];')
    lines.append("}")
    return "\n".join(lines) + "\n"
