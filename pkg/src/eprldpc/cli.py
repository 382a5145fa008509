"""Command-line interface: ``eprldpc {construct,analyze,sweep,threshold,verify}``.

Every flag may also come from ``--config FILE`` holding flat ``key = value``
lines (``#`` starts a comment, dashes and underscores are interchangeable).
Flags given on the command line override the file.

Exit status: 0 success, 1 usage, 2 input/output, 3 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .construction import ConstructionConfig, ConstructionError, optimize_code, peg_mother, random_mother
from .channel import CodeSpec
from .decoders import HybridSchedule
from .gf import field
from .graph import active_submatrix, degree_distributions, estimate_p4, girth
from .io import ParseError, read_code, write_code
from .sim import DECODERS, ExperimentPlan, PlanError, estimate_threshold, run_sweep

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="key=value file; flags override it")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="output path")


def _add_schedule(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--decoder", choices=DECODERS)
    sp.add_argument("--mu", type=int, help="BP iterations per round")
    sp.add_argument("--nu", type=int, help="hard-decision iterations per round")
    sp.add_argument("--rounds", type=int, help="number of rounds h")
    sp.add_argument("--flip-threshold", type=int, help="bit-flip threshold b")
    sp.add_argument("--k-max", type=int, choices=(2, 3))
    sp.add_argument("--mode", choices=("base", "extended"))
    sp.add_argument("--in", dest="in_path", help="qalist code file")


DEFAULTS = {
    "construct": dict(seed=0, p=3, girth=6, n=120, dv=3, dc=6, mother="peg", label_rounds=None, max_p=16,
                      mode="base"),
    "analyze": dict(seed=0, trials=100_000, cap=12),
    "sweep": dict(seed=0, decoder="sepr", mu=16, nu=4, rounds=None, flip_threshold=None, k_max=2, mode="base",
                  grid="1.0,1.5,2.0", channel=None, min_errors=100, max_frames=1_000_000, max_iter=40,
                  workers=1, batch=32, timing=False, plot=None),
    "threshold": dict(seed=0, decoder="sepr", mu=16, nu=4, rounds=None, flip_threshold=None, k_max=2, mode=None,
                      target=1e-3, tolerance=0.05, low=None, high=None, frames=20, iterations=200),
    "verify": dict(seed=0, trials=100_000),
}


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="eprldpc", description="Extended binary representation codes for non-binary LDPC.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("construct", help="build a code and write a qalist file")
    _add_common(c)
    c.add_argument("--p", type=int, help="field is GF(2^p); the search starts here")
    c.add_argument("--girth", type=int, help="target girth g_s of the EPR matrix")
    c.add_argument("--n", type=int, help="number of symbols N")
    c.add_argument("--dv", type=int)
    c.add_argument("--dc", type=int)
    c.add_argument("--mother", choices=("peg", "random"))
    c.add_argument("--label-rounds", type=int, help="label optimization rounds (0 keeps random labels)")
    c.add_argument("--max-p", type=int)
    c.add_argument("--mode", choices=("base", "extended"), help="transmission mode recorded in the file")

    a = sub.add_parser("analyze", help="girth, degree distributions and p4 of a code")
    _add_common(a)
    a.add_argument("--in", dest="in_path", help="qalist code file")
    a.add_argument("--trials", type=int, help="Monte-Carlo trials for p4")
    a.add_argument("--cap", type=int, help="longest cycle searched")

    s = sub.add_parser("sweep", help="BER/FER sweep to CSV (and SVG)")
    _add_common(s)
    _add_schedule(s)
    s.add_argument("--grid", help="comma-separated channel parameters")
    s.add_argument("--channel", choices=("biawgn", "bsc", "bec"))
    s.add_argument("--min-errors", type=int)
    s.add_argument("--max-frames", type=int)
    s.add_argument("--max-iter", type=int)
    s.add_argument("--workers", type=int)
    s.add_argument("--batch", type=int)
    s.add_argument("--timing", action="store_const", const=True, help="fill the seconds column")
    s.add_argument("--plot", help="SVG output path")

    t = sub.add_parser("threshold", help="syndrome-entropy threshold by bisection")
    _add_common(t)
    _add_schedule(t)
    t.add_argument("--target", type=float)
    t.add_argument("--tolerance", type=float)
    t.add_argument("--low", type=float)
    t.add_argument("--high", type=float)
    t.add_argument("--frames", type=int)
    t.add_argument("--iterations", type=int)

    v = sub.add_parser("verify", help="cycle-probability, resolvability and f_omega self-checks")
    _add_common(v)
    v.add_argument("--trials", type=int)
    return ap


def read_config(path: str) -> dict[str, str]:
    out = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"{path}:{ln}: expected key=value")
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def merge_options(parser: argparse.ArgumentParser, ns: argparse.Namespace) -> argparse.Namespace:
    """Defaults, then the config file, then explicit flags."""
    cmd = ns.command
    sp = parser._subparsers._group_actions[0].choices[cmd]
    actions = {a.dest: a for a in sp._actions}
    opts = {d: None for d in actions if d != "help"}
    opts.update(DEFAULTS[cmd])
    if ns.config:
        for key, val in read_config(ns.config).items():
            dest = "in_path" if key == "in" else key
            act = actions.get(dest)
            if act is None or dest in ("config", "help"):
                raise UsageError(f"unknown config key {key!r} for {cmd}")
            if act.const is True:
                opts[dest] = val.lower() in ("1", "true", "yes", "on")
            else:
                conv = act.type or str
                try:
                    opts[dest] = conv(val)
                except ValueError as exc:
                    raise UsageError(f"config key {key}: {exc}") from exc
                if act.choices is not None and opts[dest] not in act.choices:
                    raise UsageError(f"config key {key}: {val!r} not in {list(act.choices)}")
    for k, v in vars(ns).items():
        if v is not None:
            opts[k] = v
    return argparse.Namespace(**opts)


def _schedule(o) -> HybridSchedule:
    kw = dict(flip_threshold=o.flip_threshold, k_max=o.k_max)
    if o.rounds is None:
        return HybridSchedule.from_max_iter(getattr(o, "max_iter", None) or getattr(o, "iterations", 40),
                                            o.mu, o.nu, **kw)
    return HybridSchedule(o.mu, o.nu, o.rounds, **kw)


def _need_in(o) -> CodeSpec:
    if not getattr(o, "in_path", None):
        raise UsageError("--in is required")
    return read_code(o.in_path)


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_construct(o) -> int:
    cfg = ConstructionConfig(p=o.p, N=o.n, g_s=o.girth, dv=o.dv, dc=o.dc, seed=o.seed,
                             label_rounds=o.label_rounds, max_p=o.max_p)
    if o.mother == "peg":
        mother = peg_mother(cfg)
    else:
        vd, cd = cfg.degree_sequences()
        mother = random_mother(vd, cd, o.seed)
    try:
        omega_e, gens, img, rep = optimize_code(cfg, mother)
    except ConstructionError as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    spec = CodeSpec.from_image(img, omega_e, gens, {"g_s": o.girth, "mode": o.mode})
    if o.out:
        write_code(spec, o.out)
        Path(o.out + ".report").write_text(rep.text())
    sys.stdout.write(rep.text())
    return EXIT_OK


def _dist(d: dict) -> str:
    return " ".join(f"{k}:{v:.4f}" for k, v in sorted(d.items()))


def cmd_analyze(o) -> int:
    spec = _need_in(o)
    ext = spec.omega_e.matrix
    rep = girth(ext, o.cap)
    lines = [rep.describe(), f"p: {spec.p}", f"N: {spec.N}", f"M: {spec.h.M}",
             f"extended rows: {ext.n_rows}", f"extended columns: {ext.n_cols}",
             f"rate: {float(spec.rate):.4f}", f"extended rate: {float(spec.rate_extended):.4f}",
             f"binary image {girth(spec.img.matrix, o.cap).describe()}"]
    for name, m in (("mother", spec.h.mother()), ("extended", active_submatrix(ext))):
        lam, rho = degree_distributions(m)
        lines += [f"{name} lambda (edge): {_dist(lam)}", f"{name} rho (edge): {_dist(rho)}"]
    if spec.q >= 4:
        est = estimate_p4(field(spec.p), o.trials, o.seed)
        lines.append(f"p4: {est.estimate:.5f} +/- {est.standard_error:.5f} (1/(q-1) = {1 / (spec.q - 1):.5f})")
    _emit("\n".join(lines) + "\n", o.out)
    return EXIT_OK


def cmd_sweep(o) -> int:
    spec = _need_in(o)
    try:
        grid = [float(x) for x in str(o.grid).split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --grid: {exc}") from exc
    plan = ExperimentPlan(spec, o.decoder, grid, o.min_errors, o.max_frames, _schedule(o), o.seed, o.mode,
                          o.max_iter, o.channel, o.workers, o.batch)
    res = run_sweep(plan, timing=o.timing)
    _emit(res.to_csv(o.timing), o.out)
    if o.plot:
        res.plot(o.plot)
    return EXIT_OK


def cmd_threshold(o) -> int:
    spec = _need_in(o)
    est = estimate_threshold(spec, o.decoder, o.target, o.tolerance, o.low, o.high, o.frames, o.iterations,
                             o.seed, o.mode)
    lines = [f"threshold: {est.value:.4f} {est.unit}", f"bracket: [{est.low:.4f}, {est.high:.4f}]",
             f"target entropy: {est.target:g}"] + [f"  probe {x:.4f}: {v:.6g}" for x, v in est.trace]
    _emit("\n".join(lines) + "\n", o.out)
    return EXIT_OK


def cmd_verify(o) -> int:
    from .verify import run_all

    results = run_all(o.trials, o.seed)
    text = "\n".join(r.line() for r in results) + "\n"
    _emit(text, o.out)
    if o.out:
        sys.stdout.write(text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMMANDS = {"construct": cmd_construct, "analyze": cmd_analyze, "sweep": cmd_sweep,
            "threshold": cmd_threshold, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        o = merge_options(parser, ns)
        return COMMANDS[o.command](o)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (PlanError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
