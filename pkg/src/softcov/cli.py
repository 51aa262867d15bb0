"""Command-line runner: ``softcov {exponents,simulate,scaling,verify}``.

Exit codes: 0 success, 1 a verification check failed, 2 usage or
validation error.  Floats are written with 17 significant digits.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys

from . import exponents, simulator
from .channel import load_channel
from .checks import run_checks
from .errors import MemoryCap, SoftCoveringError
from .fit import ExperimentConfig, fit_scaling

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


def _fmt(v) -> str:
    return "%.17g" % v


def dumps(obj, indent=0) -> str:
    """JSON with every float at 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}"{k}": {dumps(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v, indent + 1) for v in obj) + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return '"%s"' % obj
        return _fmt(obj)
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return dumps(float(obj), indent)


def _n_list(text: str):
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part or ".." in part:
            a, b = part.replace("..", "-").split("-")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    if not out or any(n < 1 for n in out):
        raise argparse.ArgumentTypeError("--n needs positive integers, e.g. 4,5,6 or 4-12")
    return tuple(out)


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("--seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="softcov", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, rate=True):
        sp.add_argument("--channel", required=True, help="JSON channel file")
        if rate:
            sp.add_argument("--rate", type=float, required=True, help="rate in nats")

    sp = sub.add_parser("exponents", help="print exponents and one-shot bound as JSON")
    common(sp)

    for name in ("simulate", "scaling"):
        sp = sub.add_parser(name, help=f"{name} campaign over a blocklength grid")
        common(sp)
        sp.add_argument("--n", type=_n_list, default=tuple(range(4, 13)))
        sp.add_argument("--trials", type=int, default=None, help="trials per n (default schedule)")
        sp.add_argument("--mode", choices=simulator.MODES, default="fixed")
        sp.add_argument("--seed", type=_seed, default=0)
        sp.add_argument("--out", default=".", help="output directory")
        if name == "scaling":
            sp.add_argument("--target", choices=("kl", "tv"), default="kl")

    sp = sub.add_parser("verify", help="run the inequality and domination checks")
    common(sp, rate=False)
    sp.add_argument("--seed", type=_seed, default=0)
    return p


def cmd_exponents(args, out) -> int:
    ch = load_channel(args.channel)
    rep = exponents.exponent_report(ch, args.rate)
    d = rep.to_dict()
    d["one_shot_tv_bound"] = exponents.gallager_tv_one_shot(ch, math.exp(args.rate))
    a_star = 1.0 / (1.0 - rep.rho_star)
    d["alpha_mutual_information"] = {
        "1": exponents.alpha_mutual_information(ch, 1.0),
        "2": exponents.alpha_mutual_information(ch, 2.0),
        "1/(1-rho*)": exponents.alpha_mutual_information(ch, a_star),
    }
    d["alpha_star"] = a_star
    print(dumps(d), file=out)
    return EXIT_OK


def _config(args, ch) -> ExperimentConfig:
    cfg = ExperimentConfig(args.channel, args.rate, args.n, args.trials, args.mode, args.seed, args.out)
    cfg.validate(ch)
    return cfg


def run_campaign(ch, cfg: ExperimentConfig, out_dir: str):
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for n in cfg.n_grid:
        try:
            batch = simulator.estimate_soft_covering(
                ch, n, cfg.rate, cfg.trials_for(n), cfg.mode, cfg.master_seed
            )
        except MemoryCap as exc:
            raise MemoryCap(f"n = {n}: {exc}", n=n) from None
        with open(os.path.join(out_dir, f"trials_n{n}.csv"), "w", newline="") as fh:
            batch.write_csv(fh)
        if cfg.mode == "fixed":
            size = simulator.fixed_codebook_size(n, cfg.rate)
            rows.append((n, batch, str(size), _fmt(math.log(size) / n)))
        else:
            rows.append((n, batch, _fmt(simulator.poisson_mean(n, cfg.rate)), _fmt(cfg.rate)))
    with open(os.path.join(out_dir, "summary.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "mean_kl", "stderr_kl", "mean_tv", "stderr_tv", "M", "mode", "effective_rate"])
        for n, b, size, eff in rows:
            w.writerow([n, _fmt(b.mean_kl), _fmt(b.stderr_kl), _fmt(b.mean_tv), _fmt(b.stderr_tv),
                        size, cfg.mode, eff])
    return [(n, b) for n, b, _, _ in rows]


def cmd_simulate(args, out) -> int:
    ch = load_channel(args.channel)
    cfg = _config(args, ch)
    for n, b in run_campaign(ch, cfg, args.out):
        print(f"n={n} mean_kl={_fmt(b.mean_kl)} mean_tv={_fmt(b.mean_tv)} trials={b.trials}", file=out)
    return EXIT_OK


def cmd_scaling(args, out) -> int:
    ch = load_channel(args.channel)
    cfg = _config(args, ch)
    if len(cfg.n_grid) < 4:
        raise ValueError("scaling needs at least 4 blocklengths")
    rep = exponents.exponent_report(ch, args.rate)
    results = run_campaign(ch, cfg, args.out)
    means = [b.mean_kl if args.target == "kl" else b.mean_tv for _, b in results]
    errs = [b.stderr_kl if args.target == "kl" else b.stderr_tv for _, b in results]
    fit = fit_scaling(cfg.n_grid, means, rep.predicted_slope(args.target),
                      rep.predicted_log_n_power(args.target), args.target)
    with open(os.path.join(args.out, f"scaling_{args.target}.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "mean", "stderr", "log_mean", "fitted_log_mean"])
        for n, m, e, lm, f in zip(cfg.n_grid, means, errs, fit.log_means, fit.predict(cfg.n_grid)):
            w.writerow([n, _fmt(m), _fmt(e), _fmt(lm), _fmt(f)])
    print(dumps(fit.to_dict()), file=out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    ch = load_channel(args.channel)
    failed = 0
    for r in run_checks(ch, args.seed):
        print(r.line(), file=out, flush=True)
        failed += not r.passed
    print(f"{'FAIL' if failed else 'PASS'}: {failed} check(s) failed", file=out)
    return EXIT_CHECK_FAILED if failed else EXIT_OK


COMMANDS = {"exponents": cmd_exponents, "simulate": cmd_simulate,
            "scaling": cmd_scaling, "verify": cmd_verify}


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except (SoftCoveringError, ValueError, OSError) as exc:
        print(f"softcov {args.command}: error: {exc}", file=err)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
