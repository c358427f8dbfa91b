"""Command-line front end: ``bfsketch <command> [options]``.

A run is described by a JSON config::

    {
      "variant": "standard",
      "params": {"m": 65536, "k": 8},
      "workload": {"n": 4096, "probes": 1000000, "deletes": 0},
      "seed": 0
    }

or, for an equal-memory comparison, ``"variants"`` plus ``"bits_per_element"``
lists instead of ``"variant"``/``"params"``.  Exit codes: 0 success,
2 invalid config or input, 3 an operation the variant does not support.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field

from . import serialize
from .analysis import (REPORT_COLUMNS, TrialReport, compare_budget, distinct_members,
                       empirical_fpp, generate_stream, measure_throughput, random_probes)
from .errors import BloomError, CapabilityError, FormatError, ParameterError
from .registry import VARIANTS, capability_footnote, capability_matrix, create

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPABILITY = 3

TOP_KEYS = {"variant", "params", "workload", "seed", "format", "out", "variants", "bits_per_element"}
WORKLOAD_KEYS = {"n", "probes", "deletes", "dist", "universe", "s"}
# variants whose items are not plain integers or whose constructor needs data
CLI_UNSUPPORTED = {"complement", "hdbf", "distance-sensitive", "compacted", "matrix"}


class ConfigError(BloomError):
    pass


@dataclass
class RunConfig:
    variant: str | None = None
    params: dict = field(default_factory=dict)
    n: int = 1000
    probes: int = 100_000
    deletes: int = 0
    dist: str = "distinct"
    universe: int | None = None
    s: float = 1.0
    seed: int = 0
    format: str = "csv"
    out: str | None = None
    variants: list | None = None
    bits_per_element: list | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(raw) - TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        work = raw.get("workload", {})
        if not isinstance(work, dict):
            raise ConfigError("workload must be an object")
        unknown = set(work) - WORKLOAD_KEYS
        if unknown:
            raise ConfigError(f"unknown workload keys: {sorted(unknown)}")
        cfg = cls(
            variant=raw.get("variant"),
            params=dict(raw.get("params", {})),
            n=work.get("n", 1000),
            probes=work.get("probes", 100_000),
            deletes=work.get("deletes", 0),
            dist=work.get("dist", "distinct"),
            universe=work.get("universe"),
            s=work.get("s", 1.0),
            seed=raw.get("seed", 0),
            format=raw.get("format", "csv"),
            out=raw.get("out"),
            variants=raw.get("variants"),
            bits_per_element=raw.get("bits_per_element"),
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        comparing = self.variants is not None or self.bits_per_element is not None
        if comparing:
            if self.variant is not None or self.params:
                raise ConfigError("use either variant/params or variants/bits_per_element")
            if not self.variants or not self.bits_per_element:
                raise ConfigError("variants and bits_per_element must both be non-empty lists")
            names = self.variants
        else:
            if not self.variant:
                raise ConfigError("config needs a 'variant'")
            names = [self.variant]
        for name in names:
            if name not in VARIANTS:
                raise ConfigError(f"unknown variant {name!r}")
            if name in CLI_UNSUPPORTED:
                raise ConfigError(f"variant {name!r} cannot be driven from the command line")
        for key in ("n", "probes", "deletes", "seed"):
            value = getattr(self, key)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ConfigError(f"{key} must be a non-negative integer")
        if self.n < 1 or self.probes < 1:
            raise ConfigError("n and probes must be positive")
        if self.deletes > self.n:
            raise ConfigError("deletes cannot exceed n")
        if self.seed >= 2**64:
            raise ConfigError("seed must fit in 64 bits")
        if self.dist not in ("distinct", "uniform", "zipf"):
            raise ConfigError("dist must be distinct, uniform or zipf")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if not isinstance(self.params, dict):
            raise ConfigError("params must be an object")

    def members(self) -> list[int]:
        if self.dist == "distinct":
            return distinct_members(self.n, self.seed)
        universe = self.universe or 10 * self.n
        return generate_stream(self.dist, self.n, universe, self.seed, self.s)


def read_config(path: str | None, seed: int | None, fmt: str | None, out: str | None) -> RunConfig:
    if path is None:
        raise ConfigError("--config is required")
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if isinstance(raw, dict):
        if seed is not None:
            raw["seed"] = seed
        if fmt is not None:
            raw["format"] = fmt
        if out is not None:
            raw["out"] = out
    return RunConfig.from_dict(raw)


def build_loaded(cfg: RunConfig):
    """Construct the configured filter and run the insert (and delete) workload."""
    filt = create(cfg.variant, seed=cfg.seed, **cfg.params)
    members = cfg.members()
    for x in members:
        filt.insert(x)
    removed = members[: cfg.deletes]
    for x in removed:
        filt.remove(x)
    return filt, members[cfg.deletes:]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render(reports: list[TrialReport], fmt: str) -> str:
    rows = [r.row() for r in reports]
    if fmt == "json":
        for r, rep in zip(rows, reports):
            if rep.error:
                r["error"] = rep.error
        return json.dumps(rows, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in rows:
        writer.writerow([_cell(r[c]) for c in REPORT_COLUMNS])
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _summary(filt) -> dict:
    d = filt.describe()
    return {"variant": d.variant.name.lower(), "params": d.params, "seed": d.seed, "n": int(filt.n),
            "size_bits": int(filt.size_bits)}


def cmd_build(args) -> int:
    cfg = read_config(args.config, args.seed, args.format, args.out)
    filt, _ = build_loaded(cfg)
    emit(json.dumps(_summary(filt), sort_keys=True, default=str) + "\n", cfg.out)
    return EXIT_OK


def cmd_save(args) -> int:
    cfg = read_config(args.config, args.seed, args.format, args.out)
    if not cfg.out:
        raise ConfigError("save needs --out")
    filt, _ = build_loaded(cfg)
    size = serialize.save(filt, cfg.out)
    print(f"wrote {size} bytes to {cfg.out}")
    return EXIT_OK


def cmd_load(args) -> int:
    filt = serialize.load(args.path)
    emit(json.dumps(_summary(filt), sort_keys=True, default=str) + "\n", args.out)
    return EXIT_OK


def _parse_item(text: str):
    return int(text) if text.isdigit() else text


def cmd_query(args) -> int:
    filt = serialize.load(args.path)
    lines = [f"{item}\t{'present' if filt.query(_parse_item(item)).present else 'absent'}"
             for item in args.items]
    emit("\n".join(lines) + ("\n" if lines else ""), args.out)
    return EXIT_OK


def cmd_bench_fpp(args) -> int:
    cfg = read_config(args.config, args.seed, args.format, args.out)
    if cfg.variants:
        reports = compare_budget(cfg.variants, cfg.bits_per_element, cfg.n, cfg.seed, cfg.probes)
    else:
        filt, members = build_loaded(cfg)
        reports = [empirical_fpp(filt, cfg.members(), cfg.probes, cfg.seed, variant=cfg.variant)]
    emit(render(reports, cfg.format), cfg.out)
    return EXIT_OK


def cmd_bench_throughput(args) -> int:
    cfg = read_config(args.config, args.seed, args.format, args.out)
    if cfg.variants:
        raise ConfigError("bench-throughput takes a single variant")
    filt = create(cfg.variant, seed=cfg.seed, **cfg.params)
    members = cfg.members()
    insert_rate = measure_throughput(filt, members, "insert")
    probes = random_probes(cfg.probes, cfg.seed, members)
    report = empirical_fpp(filt, members, cfg.probes, cfg.seed, probe_factory=lambda _n, _s: probes,
                           timed=True, variant=cfg.variant)
    report.extra["insert_throughput"] = insert_rate
    emit(render([report], cfg.format), cfg.out)
    return EXIT_OK


def cmd_capabilities(args) -> int:
    rows = capability_matrix()
    fmt = args.format or "csv"
    if fmt == "json":
        text = json.dumps({"rows": [dict(zip(("filter", "main_trait", "C", "D", "FN", "result"),
                                             r.as_tuple())) for r in rows],
                           "footnote": capability_footnote()}, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("Filter", "Main Trait", "C", "D", "FN", "Result"))
        for r in rows:
            writer.writerow(r.as_tuple())
        text = buf.getvalue() + "# " + capability_footnote() + "\n"
    emit(text, args.out)
    return EXIT_OK


COMMANDS = {
    "build": cmd_build,
    "query": cmd_query,
    "bench-fpp": cmd_bench_fpp,
    "bench-throughput": cmd_bench_throughput,
    "capabilities": cmd_capabilities,
    "save": cmd_save,
    "load": cmd_load,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bfsketch", description="Bloom-filter variants toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="JSON run configuration")
            p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), help="report format")
        return p

    common(sub.add_parser("build", help="build a filter and print its summary"))
    common(sub.add_parser("save", help="build a filter and write it to --out"))
    common(sub.add_parser("bench-fpp", help="measure the false-positive rate"))
    common(sub.add_parser("bench-throughput", help="measure insert and query throughput"))
    common(sub.add_parser("capabilities", help="print the capability matrix"), config=False)
    p = common(sub.add_parser("load", help="load a saved filter and print its summary"), config=False)
    p.add_argument("path")
    p = common(sub.add_parser("query", help="query items against a saved filter"), config=False)
    p.add_argument("path")
    p.add_argument("items", nargs="*")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CapabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (ConfigError, ParameterError, FormatError, BloomError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
