"""Command-line surface: run configuration, JSON reports, golden corpus.

Every command reads an instance (target graph, weights, torus size),
computes a deterministic result document, and writes it as JSON with
sorted keys. Volatile data (timestamp, runtime) lives in a separate
"meta" object, so the "result" object is byte-identical across reruns
of the same configuration and seed.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import statistics
import sys
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

from .analysis import (
    antipode,
    conditional_comparison,
    conjecture_f_q,
    conjecture_partition_prediction,
    consistency_L_vs_f,
    equipartition_class,
    far_vertex,
    influence_ratio,
    occupation_comparison,
    theorem_influence_ratio,
)
from .constraint_graph import (
    ConstraintGraph,
    WeightSet,
    blowup,
    check_blowup_pair_bijection,
    eta_and_maximal_pairs,
    load,
    mask_members,
    preset,
)
from .errors import (
    BudgetExceeded,
    CapExceeded,
    ConfigError,
    NotEquipartition,
    OracleMismatch,
    ParseError,
    TorushomError,
    ZeroConditioning,
    ZeroDenominator,
)
from .exact import (
    brute_force_partition_function,
    partition_function,
    transfer_matrix_partition_function,
)
from .sampler import ChainConfig, ChainStats, classify, run_chain
from .torus import TorusGraph

COMMANDS = ("analyze", "count", "sample", "influence", "conjecture", "corpus")

_INT_FIELDS = frozenset({"m", "d", "steps", "burn_in", "thin", "seed", "max_d"})
_BOOL_FIELDS = frozenset({"update"})


# ------------------------------------------------------------- run config


@dataclass(frozen=True)
class RunConfig:
    """Flat bag of every knob; commands read the fields they use."""

    command: str
    h: str = "ind"
    weights: str | None = None
    m: int = 2
    d: int = 2
    method: str = "both"
    steps: int | None = None
    burn_in: int = 0
    thin: int | None = None
    initial: str = "uniform-greedy"
    seed: int = 0
    x: str = "antipodal"
    k: str | None = None
    l: str | None = None
    max_d: int = 3
    out: str | None = None
    csv: str | None = None
    golden_dir: str = "tests/golden"
    update: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")

    def to_json_dict(self) -> dict:
        return {
            f.name: getattr(self, f.name)
            for f in fields(self)
            if getattr(self, f.name) is not None
        }

    def to_text(self) -> str:
        lines = []
        for name, value in self.to_json_dict().items():
            if isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{name}={value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_mapping(cls, mapping: dict) -> "RunConfig":
        vals = {}
        for key, raw in mapping.items():
            if raw is None:
                continue
            vals[key] = coerce_config_value(key, raw)
        if "command" not in vals:
            raise ConfigError("configuration is missing 'command'")
        try:
            return cls(**vals)
        except TypeError as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        return cls.from_mapping(parse_config_text(text))


def _field_names() -> frozenset[str]:
    return frozenset(f.name for f in fields(RunConfig))


def coerce_config_value(key: str, raw):
    if key not in _field_names():
        raise ConfigError(f"unknown configuration key {key!r}")
    if key in _INT_FIELDS:
        return parse_int(raw, key)
    if key in _BOOL_FIELDS:
        if isinstance(raw, bool):
            return raw
        word = str(raw).strip().lower()
        if word in ("true", "1", "yes"):
            return True
        if word in ("false", "0", "no"):
            return False
        raise ConfigError(f"{key} expects true/false, got {raw!r}")
    return str(raw)


def parse_int(raw, key: str) -> int:
    """Integer option; scientific notation like 1e6 is accepted."""
    if isinstance(raw, int) and not isinstance(raw, bool):
        return raw
    text = str(raw).strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{key} expects an integer, got {raw!r}") from None
    if not value.is_integer():
        raise ConfigError(f"{key} expects an integer, got {raw!r}")
    return int(value)


def parse_config_text(text: str) -> dict:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"bad JSON configuration: {e}") from None
        if not isinstance(doc, dict):
            raise ConfigError("JSON configuration must be an object")
        return doc
    mapping: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        mapping[key.strip()] = value.strip()
    return mapping


def load_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from None
    return parse_config_text(text)


# ------------------------------------------------------- instance plumbing


def resolve_instance(cfg: RunConfig) -> tuple[ConstraintGraph, WeightSet]:
    """Target graph from a preset name or a file, weights flag on top."""
    name = cfg.h
    if os.sep in name or name.endswith((".txt", ".json")) or os.path.exists(name):
        try:
            g, w = load(name)
        except OSError as e:
            raise ConfigError(f"cannot read target graph {name}: {e}") from None
    else:
        g = preset(name)
        w = WeightSet.ones(g.h)
    if cfg.weights is not None:
        try:
            w = WeightSet.parse(cfg.weights)
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"bad weights {cfg.weights!r}: {e}") from None
    if len(w) != g.h:
        raise ConfigError(f"{len(w)} weights for {g.h} colors")
    return g, w


def resolve_torus(cfg: RunConfig) -> TorusGraph:
    try:
        return TorusGraph(cfg.m, cfg.d)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def resolve_color(g: ConstraintGraph, raw: str | None, flag: str) -> int:
    """Color by label (preferred) or by numeric index."""
    if raw is None:
        raise ConfigError(f"--{flag} is required for this command")
    if raw in g.labels:
        return g.labels.index(raw)
    try:
        k = int(raw)
    except ValueError:
        raise ConfigError(
            f"--{flag}: {raw!r} is neither a label in {g.labels} nor an index"
        ) from None
    if not 0 <= k < g.h:
        raise ConfigError(f"--{flag}: index {k} out of range for {g.h} colors")
    return k


def resolve_vertex(t: TorusGraph, raw: str) -> int:
    if raw == "antipodal":
        return antipode(t)
    if raw == "far-even":
        return far_vertex(t, "even")
    if raw == "far-odd":
        return far_vertex(t, "odd")
    try:
        v = int(raw)
    except ValueError:
        raise ConfigError(
            f"--x expects a vertex index, 'antipodal', 'far-even', or "
            f"'far-odd', got {raw!r}"
        ) from None
    if not 0 <= v < t.n:
        raise ConfigError(f"--x: vertex {v} outside torus of {t.n} vertices")
    return v


def frac_str(value) -> str:
    return str(Fraction(value))


def pair_labels(g: ConstraintGraph, pair) -> dict:
    return {
        "a": [g.labels[k] for k in mask_members(pair.a)],
        "b": [g.labels[k] for k in mask_members(pair.b)],
    }


# --------------------------------------------------------------- reporting


def result_bytes(result: dict) -> str:
    return json.dumps(result, indent=2, sort_keys=True)


def emit(cfg: RunConfig, result: dict, started: float, summary: str) -> None:
    doc = {
        "result": result,
        "meta": {
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(
                timespec="seconds"
            ),
            "runtime_ms": int((time.monotonic() - started) * 1000),
            "config": cfg.to_json_dict(),
        },
    }
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)


def write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# ---------------------------------------------------------------- commands


def cmd_analyze(cfg: RunConfig) -> dict:
    g, w = resolve_instance(cfg)
    eta, pairs = eta_and_maximal_pairs(g, w)
    bl = blowup(g, w)
    return {
        "colors": g.h,
        "labels": list(g.labels),
        "weights": [str(q) for q in w.weights],
        "eta": frac_str(eta),
        "pair_count": len(pairs),
        "maximal_pairs": [pair_labels(g, p) for p in sorted(pairs)],
        "support": sorted(
            sorted(g.labels[k] for k in mask_members(p.a)) for p in pairs
        ),
        "equipartition": equipartition_class(g, w),
        "blowup": {
            "scale_c": bl.scale_c,
            "vertices": bl.graph.h,
            "block_sizes": list(bl.block_sizes()),
            "pair_bijection_ok": check_blowup_pair_bijection(g, w),
        },
    }


def _analyze_summary(result: dict) -> str:
    return (
        f"eta={result['eta']} pairs={result['pair_count']} "
        f"class={result['equipartition']}"
    )


def cmd_count(cfg: RunConfig) -> dict:
    g, w = resolve_instance(cfg)
    t = resolve_torus(cfg)
    if cfg.method not in ("brute", "transfer", "both", "auto"):
        raise ConfigError(f"unknown counting method {cfg.method!r}")
    out: dict = {"m": t.m, "d": t.d, "n": t.n, "method": cfg.method}
    if cfg.method == "both":
        zb = brute_force_partition_function(t, g, w)
        zt = transfer_matrix_partition_function(t, g, w)
        out["z_brute"] = frac_str(zb.z)
        out["z_transfer"] = frac_str(zt.z)
        out["instance"] = zb.instance
        if zb.z != zt.z:
            raise OracleMismatch(
                f"brute {zb.z} != transfer {zt.z} on {zb.instance}"
            )
        out["z"] = frac_str(zb.z)
    else:
        res = partition_function(t, g, w, method=cfg.method)
        out["z"] = frac_str(res.z)
        out["instance"] = res.instance
        out["route"] = res.method
    return out


def cmd_sample(cfg: RunConfig) -> dict:
    g, w = resolve_instance(cfg)
    t = resolve_torus(cfg)
    steps = cfg.steps if cfg.steps is not None else 10_000
    thin = cfg.thin if cfg.thin is not None else max(1, (steps - cfg.burn_in) // 200)
    chain_cfg = ChainConfig(
        steps=steps, burn_in=cfg.burn_in, seed=cfg.seed, thin=thin
    )
    stats = ChainStats()
    even, odd = t.side_sets()
    trace = []
    step = cfg.burn_in
    final = None
    for state in run_chain(t, g, w, chain_cfg, cfg.initial, stats=stats):
        step += thin
        label = classify(t, g, w, state)
        trace.append(
            {
                "step": step,
                "kind": label.kind,
                "pair": pair_labels(g, label.pair) if label.pair else None,
                "ideal_fraction": frac_str(label.ideal_fraction),
                "histogram_even": _side_histogram(g, state, even),
                "histogram_odd": _side_histogram(g, state, odd),
            }
        )
        final = label
    return {
        "instance": f"m={t.m} d={t.d} h={g.h}",
        "steps": steps,
        "burn_in": cfg.burn_in,
        "thin": thin,
        "seed": cfg.seed,
        "initial": cfg.initial,
        "trace": trace,
        "stats": {
            "forced_moves": stats.forced_moves,
            "color_changes": stats.color_changes,
        },
        "final_kind": final.kind if final else None,
    }


def _side_histogram(g: ConstraintGraph, state, side) -> dict:
    counts = Counter(state[v] for v in side)
    return {g.labels[k]: counts.get(k, 0) for k in range(g.h)}


def _sample_summary(result: dict) -> str:
    last = result["trace"][-1] if result["trace"] else None
    tail = (
        f" final={result['final_kind']} ideal_fraction={last['ideal_fraction']}"
        if last
        else ""
    )
    return f"samples={len(result['trace'])}{tail}"


def cmd_influence(cfg: RunConfig) -> dict:
    g, w = resolve_instance(cfg)
    t = resolve_torus(cfg)
    y = resolve_vertex(t, cfg.x)
    ell = resolve_color(g, cfg.l, "l")
    k = resolve_color(g, cfg.k, "k") if cfg.k is not None else ell
    relation = "same-side" if t.parity(y) == 0 else "cross-side"
    out: dict = {
        "instance": f"m={t.m} d={t.d} h={g.h}",
        "pin_vertex": y,
        "pin_color": g.labels[ell],
        "observe_vertex": 0,
        "observe_color": g.labels[k],
        "relation": relation,
        "labels": list(g.labels),
    }
    try:
        out["conditional"] = conditional_comparison(
            t, g, w, relation, ell, y=y
        ).to_json_dict()
        out["occupation"] = occupation_comparison(t, g, w).to_json_dict()
    except BudgetExceeded:
        if cfg.steps is None:
            raise
        out["conditional"] = None
        out["occupation"] = None
    except (NotEquipartition, ZeroConditioning) as e:
        out["conditional"] = None
        out["occupation"] = None
        out["target_note"] = str(e)
    try:
        out["ratio_exact"] = frac_str(influence_ratio(t, g, w, 0, k, y, ell))
    except (BudgetExceeded, ZeroDenominator):
        out["ratio_exact"] = None
    try:
        out["ratio_target"] = frac_str(
            theorem_influence_ratio(g, w, relation, k, ell)
        )
    except (NotEquipartition, ZeroConditioning, ZeroDenominator):
        out["ratio_target"] = None
    if cfg.steps is not None:
        out["empirical"] = _empirical_conditional(t, g, w, cfg, y, ell, k)
    return out


def _empirical_conditional(
    t: TorusGraph,
    g: ConstraintGraph,
    w: WeightSet,
    cfg: RunConfig,
    y: int,
    ell: int,
    k: int,
) -> dict:
    burn = cfg.burn_in if cfg.burn_in else cfg.steps // 10
    chain_cfg = ChainConfig(
        steps=cfg.steps, burn_in=burn, seed=cfg.seed, pinned=(y, ell)
    )
    hits = []
    for state in run_chain(t, g, w, chain_cfg, cfg.initial):
        hits.append(1.0 if state[0] == k else 0.0)
    stderr = None
    if len(hits) >= 4:
        batches = min(10, len(hits) // 2)
        size = len(hits) // batches
        means = [
            sum(hits[i * size : (i + 1) * size]) / size for i in range(batches)
        ]
        stderr = statistics.stdev(means) / (batches**0.5)
    return {
        "p_conditional": sum(hits) / len(hits),
        "stderr": stderr,
        "n_samples": len(hits),
    }


def _influence_summary(result: dict) -> str:
    cond = result.get("conditional")
    dist = cond["d_inf_distance"] if cond else None
    dist_text = f"{dist[0]}/{dist[1]}" if dist else "n/a"
    return (
        f"relation={result['relation']} pin={result['pin_vertex']} "
        f"ratio_exact={result['ratio_exact']} "
        f"ratio_target={result['ratio_target']} d_inf={dist_text}"
    )


def _is_complete_uniform(g: ConstraintGraph, w: WeightSet) -> bool:
    full = g.full_mask
    return (
        w.is_uniform()
        and w[0] == 1
        and all(g.adj[k] == full ^ (1 << k) for k in range(g.h))
    )


def cmd_conjecture(cfg: RunConfig) -> dict:
    g, w = resolve_instance(cfg)
    is_coloring = _is_complete_uniform(g, w)
    rows = []
    for d in range(1, cfg.max_d + 1):
        t = TorusGraph(cfg.m, d)
        pp = conjecture_partition_prediction(g, w, t)
        row: dict = {
            "d": d,
            "n": t.n,
            "prediction": pp.total(),
            "prefactor_model": pp.prefactor_model,
            "pair_count": len(pp.predictions),
            "correction_exponents": sorted(
                {frac_str(p.correction_exponent) for p in pp.predictions}
            ),
        }
        try:
            row["exact"] = frac_str(partition_function(t, g, w).z)
            row["prediction_over_exact"] = pp.total() / float(
                Fraction(row["exact"])
            )
        except BudgetExceeded:
            row["exact"] = None
            row["prediction_over_exact"] = None
        if is_coloring and cfg.m == 2:
            row["f_q"] = frac_str(conjecture_f_q(g.h, d))
            row["consistency_L_vs_f"] = consistency_L_vs_f(g.h, d)
        rows.append(row)
    return {
        "m": cfg.m,
        "colors": g.h,
        "weights": [str(q) for q in w.weights],
        "coloring_model": is_coloring,
        "rows": rows,
    }


def _conjecture_summary(result: dict) -> str:
    lines = [
        f"{'d':>3} {'n':>6} {'prediction':>16} {'exact':>16} {'ratio':>9}  model"
    ]
    for row in result["rows"]:
        exact = row["exact"] if row["exact"] is not None else "-"
        ratio = (
            f"{row['prediction_over_exact']:9.4f}"
            if row["prediction_over_exact"] is not None
            else f"{'-':>9}"
        )
        lines.append(
            f"{row['d']:>3} {row['n']:>6} {row['prediction']:>16.6g} "
            f"{exact:>16} {ratio}  {row['prefactor_model']}"
        )
    return "\n".join(lines)


# ----------------------------------------------------------- golden corpus


def run_command(cfg: RunConfig) -> dict:
    runner = {
        "analyze": cmd_analyze,
        "count": cmd_count,
        "sample": cmd_sample,
        "influence": cmd_influence,
        "conjecture": cmd_conjecture,
    }.get(cfg.command)
    if runner is None:
        raise ConfigError(f"command {cfg.command!r} cannot run inside a corpus")
    return runner(cfg)


def worker_count() -> int:
    raw = os.environ.get("TORUSHOM_THREADS", "").strip()
    if raw:
        workers = parse_int(raw, "TORUSHOM_THREADS")
        if workers < 1:
            raise ConfigError("TORUSHOM_THREADS must be at least 1")
        return workers
    return min(8, os.cpu_count() or 1)


def cmd_corpus(cfg: RunConfig) -> dict:
    golden_dir = Path(cfg.golden_dir)
    if not golden_dir.is_dir():
        raise ConfigError(f"golden directory {golden_dir} does not exist")
    paths = sorted(golden_dir.glob("*.json"))
    if not paths:
        raise ConfigError(f"no golden files in {golden_dir}")

    def run_one(path: Path) -> dict:
        doc = json.loads(path.read_text(encoding="utf-8"))
        inst = RunConfig.from_mapping(doc["config"])
        got = run_command(inst)
        record = {"name": path.stem, "command": inst.command}
        if cfg.update:
            path.write_text(
                json.dumps(
                    {"config": inst.to_json_dict(), "result": got},
                    indent=2,
                    sort_keys=True,
                )
                + "\n",
                encoding="utf-8",
            )
            record["status"] = "updated"
        elif result_bytes(got) == result_bytes(doc.get("result")):
            record["status"] = "ok"
        else:
            record["status"] = "mismatch"
            record["expected"] = doc.get("result")
            record["got"] = got
        return record

    workers = worker_count()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        records = list(pool.map(run_one, paths))
    failed = [r["name"] for r in records if r["status"] == "mismatch"]
    result = {
        "golden_dir": str(golden_dir),
        "workers": workers,
        "total": len(records),
        "failed": failed,
        "records": records,
    }
    if failed:
        raise CorpusMismatch(result)
    return result


class CorpusMismatch(TorushomError):
    """Golden diff failure; carries the full result for reporting."""

    def __init__(self, result: dict):
        super().__init__(f"{len(result['failed'])} golden mismatches")
        self.result = result


def _corpus_summary(result: dict) -> str:
    return (
        f"golden={result['total']} failed={len(result['failed'])} "
        f"workers={result['workers']}"
    )


# ----------------------------------------------------------------- driver


def _csv_export(cfg: RunConfig, result: dict) -> None:
    if not cfg.csv:
        return
    if cfg.command == "influence":
        header = ["color", "occupation_target", "occupation_exact",
                  "conditional_target", "conditional_exact"]
        occ = result.get("occupation")
        cond = result.get("conditional")
        rows = []
        for i, label in enumerate(result["labels"]):
            def cell(block, field):
                if not block or block.get(field) is None:
                    return ""
                num, den = block[field][i]
                return f"{num}/{den}" if den != "1" else num
            rows.append([label, cell(occ, "target"), cell(occ, "exact"),
                         cell(cond, "target"), cell(cond, "exact")])
        write_csv(cfg.csv, header, rows)
    elif cfg.command == "conjecture":
        header = ["d", "n", "prediction", "exact", "prediction_over_exact",
                  "prefactor_model"]
        rows = [
            [r["d"], r["n"], repr(r["prediction"]),
             r["exact"] if r["exact"] is not None else "",
             repr(r["prediction_over_exact"])
             if r["prediction_over_exact"] is not None else "",
             r["prefactor_model"]]
            for r in result["rows"]
        ]
        write_csv(cfg.csv, header, rows)
    else:
        raise ConfigError(
            f"csv export is not available for the {cfg.command} command"
        )


_SUMMARIES = {
    "analyze": _analyze_summary,
    "count": lambda r: f"Z = {r['z']} ({r['method']})",
    "sample": _sample_summary,
    "influence": _influence_summary,
    "conjecture": _conjecture_summary,
    "corpus": _corpus_summary,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torushom",
        description="Weighted homomorphism structure on even discrete tori.",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--h", help="target graph preset name or file path")
        p.add_argument("--weights", help="comma-separated color weights")
        p.add_argument("--m", type=lambda s: parse_int(s, "m"))
        p.add_argument("--d", type=lambda s: parse_int(s, "d"))
        p.add_argument("--seed", type=lambda s: parse_int(s, "seed"))
        p.add_argument("--config", help="key=value or JSON config file")
        p.add_argument("--out", help="write the JSON document to this path")
        p.add_argument("--csv", help="export table/vector rows to this path")

    p = sub.add_parser("analyze", help="extremal pairs, blow-up, symmetry class")
    common(p)

    p = sub.add_parser("count", help="exact partition function")
    common(p)
    p.add_argument("--method", choices=["brute", "transfer", "both", "auto"])

    p = sub.add_parser("sample", help="single-site chain with phase trace")
    common(p)
    p.add_argument("--steps", type=lambda s: parse_int(s, "steps"))
    p.add_argument("--burn-in", type=lambda s: parse_int(s, "burn_in"))
    p.add_argument("--thin", type=lambda s: parse_int(s, "thin"))
    p.add_argument("--initial")

    p = sub.add_parser("influence", help="pinned-vertex conditional marginals")
    common(p)
    p.add_argument("--x", help="pin vertex: index, antipodal, far-even, far-odd")
    p.add_argument("--k", help="observed color (label or index)")
    p.add_argument("--l", help="pinned color (label or index)")
    p.add_argument("--steps", type=lambda s: parse_int(s, "steps"))
    p.add_argument("--burn-in", type=lambda s: parse_int(s, "burn_in"))

    p = sub.add_parser("conjecture", help="growth predictions vs exact counts")
    common(p)
    p.add_argument("--max-d", type=lambda s: parse_int(s, "max_d"))

    p = sub.add_parser("corpus", help="run golden instances and diff outputs")
    common(p)
    p.add_argument("--golden-dir")
    p.add_argument("--update", action="store_const", const=True, default=None)

    return parser


def build_config(argv) -> RunConfig:
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    config_path = ns.pop("config", None)
    mapping: dict = {"command": ns.pop("command")}
    if config_path:
        file_vals = load_config_file(config_path)
        file_vals.pop("command", None)  # subcommand on the CLI wins
        mapping.update(file_vals)
    mapping.update({k: v for k, v in ns.items() if v is not None})
    return RunConfig.from_mapping(mapping)


def main(argv=None) -> int:
    started = time.monotonic()
    try:
        cfg = build_config(argv)
    except SystemExit as e:
        return int(e.code or 0)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    try:
        runner = {**{c: run_command for c in COMMANDS}, "corpus": cmd_corpus}
        result = runner[cfg.command](cfg)
        _csv_export(cfg, result)
        emit(cfg, result, started, _SUMMARIES[cfg.command](result))
        return 0
    except CorpusMismatch as e:
        emit(cfg, e.result, started, _corpus_summary(e.result))
        print(f"assertion error: {e}", file=sys.stderr)
        return 4
    except (BudgetExceeded, CapExceeded) as e:
        print(f"budget error: {e}", file=sys.stderr)
        return 3
    except OracleMismatch as e:
        print(f"assertion error: {e}", file=sys.stderr)
        return 4
    except (ConfigError, ParseError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except TorushomError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
