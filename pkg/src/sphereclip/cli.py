"""Command-line front end: run a sweep and write CSV, or run the cross-checks.

Exit status: 0 success, 1 configuration error, 2 verification failure,
3 output error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import math
import os
import sys
from pathlib import Path

from .harness import ConfigError, MetricsRecord, SimConfig, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3

CSV_COLUMNS = (
    "snr_db",
    "ter",
    "mu",
    "n_est",
    "clip_mode",
    "block_index",
    "l_cl",
    "ber_measured",
    "ber_estimated",
    "avg_visited_nodes",
    "frames",
)

# config-file key -> (SimConfig field, parser)
_FILE_KEYS = {
    "snr": "snr_db",
    "snr_db": "snr_db",
    "ter": "ter",
    "mu": "mu",
    "n_est": "n_est",
    "frames": "chain_length",
    "chain_length": "chain_length",
    "chains": "chains",
    "seed": "seed",
    "clip": "clip",
    "m_t": "m_t",
    "m_r": "m_r",
    "order": "order",
    "n_info": "n_info",
    "l_min": "l_min",
    "workers": "workers",
}
_INT_FIELDS = {"n_est", "chain_length", "chains", "seed", "m_t", "m_r", "order", "n_info", "workers"}
_FLOAT_FIELDS = {"ter", "mu", "l_min"}


class EmptyRecordsError(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("arguments", message)


def parse_snr(text: str) -> tuple[float, ...]:
    """``"10,12,14"`` or inclusive ``"start:step:stop"``."""
    text = text.strip()
    try:
        if ":" in text:
            start, step, stop = (float(v) for v in text.split(":"))
            if step <= 0 or stop < start:
                raise ConfigError("snr_db", f"bad range {text!r}")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return tuple(round(start + i * step, 10) for i in range(n))
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError("snr_db", f"cannot parse {text!r}") from None
    if not values:
        raise ConfigError("snr_db", "empty SNR list")
    return values


def parse_clip(text: str) -> tuple[str, float | None]:
    text = text.strip()
    if text in ("adaptive", "off"):
        return text, None
    if text.startswith("fixed="):
        try:
            return "fixed", float(text[len("fixed=") :])
        except ValueError:
            pass
    raise ConfigError("clip", f"expected adaptive, off or fixed=<C>, got {text!r}")


def _convert(field: str, raw: str):
    try:
        if field in _INT_FIELDS:
            return int(raw)
        if field in _FLOAT_FIELDS:
            return float(raw)
    except ValueError:
        raise ConfigError(field, f"cannot parse {raw!r}") from None
    if field == "snr_db":
        return parse_snr(raw)
    return raw


def read_config_file(path: str | Path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"line {lineno}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _FILE_KEYS:
            raise ConfigError(key, f"unknown config key (line {lineno})")
        values[_FILE_KEYS[key]] = _convert(_FILE_KEYS[key], raw)
    return values


def render_config(cfg: SimConfig) -> str:
    """Config-file text that parses back to ``cfg``."""
    clip = cfg.clip_mode if cfg.clip_mode != "fixed" else f"fixed={cfg.clip_value!r}"
    lines = [
        f"snr = {','.join(repr(s) for s in cfg.snr_db)}",
        f"ter = {cfg.ter!r}",
        f"mu = {cfg.mu!r}",
        f"n_est = {cfg.n_est}",
        f"frames = {cfg.chain_length}",
        f"chains = {cfg.chains}",
        f"seed = {cfg.seed}",
        f"clip = {clip}",
        f"m_t = {cfg.m_t}",
        f"m_r = {cfg.m_r}",
        f"order = {cfg.order}",
        f"n_info = {cfg.n_info}",
        f"l_min = {cfg.l_min!r}",
        f"workers = {cfg.workers}",
    ]
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sphereclip", description="Adaptive LLR-clipping sphere decoder link simulation.")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--snr", help="comma list or start:step:stop (dB)")
    p.add_argument("--ter", help="target error rate")
    p.add_argument("--mu", help="controller step size")
    p.add_argument("--n-est", dest="n_est", help="least reliable bits used by the BER estimate")
    p.add_argument("--frames", help="blocks per tracking chain")
    p.add_argument("--chains", help="independent chains per SNR point")
    p.add_argument("--seed", help="base seed (falls back to $SIM_SEED)")
    p.add_argument("--clip", help="adaptive | fixed=<C> | off")
    p.add_argument("--workers", help="worker processes")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--verify", action="store_true", help="run oracle cross-checks instead of a simulation")
    return p


def parse_config(argv=None, env=None) -> tuple[SimConfig, argparse.Namespace]:
    """Merge defaults, ``$SIM_SEED``, the config file and flags (flags win)."""
    env = os.environ if env is None else env
    args = build_parser().parse_args(argv)
    values: dict = {}
    if env.get("SIM_SEED"):
        values["seed"] = _convert("seed", env["SIM_SEED"])
    if args.config:
        values.update(read_config_file(args.config))
    flag_fields = {
        "snr": "snr_db",
        "ter": "ter",
        "mu": "mu",
        "n_est": "n_est",
        "frames": "chain_length",
        "chains": "chains",
        "seed": "seed",
        "clip": "clip",
        "workers": "workers",
    }
    for flag, field in flag_fields.items():
        raw = getattr(args, flag)
        if raw is not None:
            values[field] = _convert(field, raw)
    if "clip" in values:
        values["clip_mode"], values["clip_value"] = parse_clip(values.pop("clip"))
    try:
        cfg = SimConfig(**values)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from None
    return cfg, args


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        # repr is locale-independent and round-trips exactly
        return repr(value)
    return str(value)


def csv_row(rec: MetricsRecord) -> list[str]:
    d = dataclasses.asdict(rec)
    return [_fmt(d[col]) for col in CSV_COLUMNS]


def emit_csv(records, out) -> None:
    """Write the header and one row per record to a path or open text stream.

    Raises:
        EmptyRecordsError: after writing the header, when there are no records.
        OSError: on I/O failure.
    """
    records = list(records)
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as fh:
            _write_rows(records, fh)
    else:
        _write_rows(records, out)
    if not records:
        raise EmptyRecordsError("no records to write")


def _write_rows(records, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in records:
        w.writerow(csv_row(rec))


def _run_verify() -> int:
    from .verify import verify_mode

    results = verify_mode()
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def main(argv=None) -> int:
    try:
        cfg, args = parse_config(argv)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.verify:
        return _run_verify()
    records = run_experiment(cfg)
    try:
        emit_csv(records, args.out if args.out else sys.stdout)
    except (OSError, EmptyRecordsError) as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
