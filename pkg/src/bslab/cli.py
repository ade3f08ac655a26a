"""Command line entry point: ``bslab run <config>``, ``bslab list``, ``bslab verify <manifest>``.

A config is a flat TOML file::

    experiment = "mahler-census"
    seed = 7
    output_dir = "out/census"

    [parameters]
    degrees = [1]
    theta = 1.0

``output_dir`` is resolved relative to the config file.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from bslab import __version__
from bslab.experiments import EXPERIMENTS, check, resolve_parameters

MASK64 = (1 << 64) - 1


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 0
    output_dir: Path = Path("out")
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; see 'bslab list'")
        if not isinstance(self.seed, int) or not 0 <= self.seed <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        self.parameters = resolve_parameters(self.experiment, self.parameters)

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "seed": self.seed, "output_dir": str(self.output_dir),
                "parameters": self.parameters}


CONFIG_KEYS = {"experiment", "seed", "output_dir", "parameters"}


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config key(s): {', '.join(unknown)}")
    if "experiment" not in data:
        raise ValueError("config needs an 'experiment' entry")
    out = Path(data.get("output_dir", "out"))
    if not out.is_absolute():
        out = path.parent / out
    return ExperimentConfig(data["experiment"], data.get("seed", 0), out, dict(data.get("parameters", {})))


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def run(config: ExperimentConfig, workers: int = 1) -> dict:
    """Run one experiment, write its artifacts and manifest, return the manifest."""
    exp = EXPERIMENTS[config.experiment]
    start = time.perf_counter()
    outcome = exp.func(config.parameters, config.seed, workers)
    wall = time.perf_counter() - start
    config.output_dir.mkdir(parents=True, exist_ok=True)
    hashes = {}
    for name, text in sorted(outcome.files.items()):
        (config.output_dir / name).write_text(text)
        hashes[name] = _sha256(text)
    manifest = {
        "config": config.to_dict(),
        "seed": config.seed,
        "version": __version__,
        "wall_time_seconds": wall,
        "results": outcome.results,
        "assertions": [a.to_dict() for a in outcome.assertions],
        "files": hashes,
        "passed": all(a.passed() for a in outcome.assertions),
    }
    with open(config.output_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return manifest


def verify(manifest_path: str | Path) -> list[str]:
    """Re-check recorded assertions and artifact hashes; returns the failures."""
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text())
    failures = []
    for a in manifest.get("assertions", []):
        if not check(a["value"], a["op"], a["bound"]):
            failures.append(f"assertion failed: {a['name']} ({a['value']} {a['op']} {a['bound']})")
    for name, digest in manifest.get("files", {}).items():
        f = manifest_path.parent / name
        if not f.exists():
            failures.append(f"missing artifact: {name}")
        elif _sha256(f.read_text()) != digest:
            failures.append(f"artifact changed: {name}")
    return failures


def list_experiments() -> list[dict]:
    return [{"name": e.name, "parameters": dict(e.defaults), "statement": e.statement}
            for e in EXPERIMENTS.values()]


def _format_value(v) -> str:
    return json.dumps(v)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bslab", description="Reproducible experiments on local limits, covers and spectra.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment from a TOML config")
    p_run.add_argument("config")
    p_run.add_argument("--workers", type=int, default=1, help="process count for independent work items")
    sub.add_parser("list", help="list experiments with their parameters")
    p_ver = sub.add_parser("verify", help="re-check the assertions of a manifest")
    p_ver.add_argument("manifest")
    args = parser.parse_args(argv)

    if args.command == "list":
        for row in list_experiments():
            print(f"{row['name']}: {row['statement']}")
            for key, val in row["parameters"].items():
                print(f"    {key} = {_format_value(val)}")
        return 0

    if args.command == "verify":
        try:
            failures = verify(args.manifest)
        except (OSError, ValueError, KeyError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        for line in failures:
            print(line)
        print("verify: ok" if not failures else f"verify: {len(failures)} failure(s)")
        return 0 if not failures else 1

    try:
        config = load_config(args.config)
        manifest = run(config, workers=args.workers)
    except (OSError, ValueError, KeyError, tomllib.TOMLDecodeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2
    for a in manifest["assertions"]:
        print(f"{'PASS' if a['passed'] else 'FAIL'}  {a['name']}: {a['value']} {a['op']} {a['bound']}")
    print(f"wrote {config.output_dir / 'manifest.json'}")
    return 0 if manifest["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
