"""Command line: Ising correlations, the four figure sweeps, and bordered
determinants of a symbol pair read from a key = value file."""

import argparse
import csv
import datetime
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import gmpy2
from gmpy2 import mpfr

from . import asymptotics as A
from . import fitting, fourier, symbols, szego, toeplitz
from .numkernel import ConfigError, NumericError, PrecisionCtx, fmt_fixed, num

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

CAPTION_GRID = list(range(100, 1001, 100))
FIGURE_GRID = [100, 150, 200, 250, 300] + list(range(400, 1001, 100))
DEFAULT_MAX_N = 300
DEFAULT_COUPLINGS = (Fraction(1, 2), Fraction(1, 4), Fraction(4, 5))

FIGURES = {
    1: dict(quantity="G_N^A", couplings=DEFAULT_COUPLINGS, c=None, grid=FIGURE_GRID),
    2: dict(quantity="G_N^A", couplings=(Fraction(1, 4), Fraction(1, 2), Fraction(4, 5)), c=None,
            grid=FIGURE_GRID),
    3: dict(quantity="G_N^B", couplings=DEFAULT_COUPLINGS, c=Fraction(975, 1000), grid=FIGURE_GRID),
    4: dict(quantity="ln Delta_N", couplings=DEFAULT_COUPLINGS, c=Fraction(1025, 1000),
            grid=CAPTION_GRID),
}


@dataclass
class RunConfig:
    command: str
    JhOverKb: Fraction = DEFAULT_COUPLINGS[0]
    JvOverKb: Fraction = DEFAULT_COUPLINGS[1]
    T: Fraction = DEFAULT_COUPLINGS[2]
    c: Fraction = None
    precisionDigits: int = 80
    Nlist: list = field(default_factory=list)
    outPath: str = None
    format: str = "csv"
    maxN: int = DEFAULT_MAX_N
    threads: int = 1
    stamp: bool = False

    def __post_init__(self):
        if self.precisionDigits < 30:
            raise ConfigError("--digits must be >= 30")
        if any(b <= a for a, b in zip(self.Nlist, self.Nlist[1:])):
            raise ConfigError("N values must be strictly increasing")
        if self.format not in ("csv", "tsv"):
            raise ConfigError("--format must be csv or tsv")
        if self.threads < 1:
            raise ConfigError("--threads must be >= 1")

    @property
    def ctx(self):
        return PrecisionCtx(self.precisionDigits)

    @property
    def sig(self):
        return self.precisionDigits - 10


# -- argument parsing -----------------------------------------------------------

def parse_n(values):
    """--n may be repeated; each value is an integer, a comma list or a:b:step."""
    out = []
    for v in values or []:
        for part in str(v).split(","):
            part = part.strip()
            if not part:
                continue
            if ":" in part:
                bits = part.split(":")
                if len(bits) not in (2, 3):
                    raise ConfigError(f"bad range {part!r}; use a:b or a:b:step")
                a, b = int(bits[0]), int(bits[1])
                step = int(bits[2]) if len(bits) == 3 else 1
                if step <= 0:
                    raise ConfigError("range step must be positive")
                out.extend(range(a, b + 1, step))
            else:
                out.append(int(part))
    return out


def _fraction(s):
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {s!r}") from exc


def build_parser():
    p = argparse.ArgumentParser(prog="bordered-toeplitz",
                                description="Bordered Toeplitz determinants and Ising correlations.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--digits", type=int, default=80, help="working precision (decimal digits, >= 30)")
    common.add_argument("--n", action="append", help="N values: 100, 100,200 or 100:300:50 (repeatable)")
    common.add_argument("--max-n", type=int, default=DEFAULT_MAX_N, dest="max_n",
                        help="largest N allowed (default %(default)s)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "tsv"), default="csv")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--stamp", action="store_true", help="add a timestamp comment line")
    ising = argparse.ArgumentParser(add_help=False)
    ising.add_argument("--jh", type=_fraction, help="J_h / k_B")
    ising.add_argument("--jv", type=_fraction, help="J_v / k_B")
    ising.add_argument("--temp", type=_fraction, help="temperature T")
    ising.add_argument("--c", type=_fraction, help="pole position for figures 3 and 4")

    sub = p.add_subparsers(dest="command", required=True)
    ic = sub.add_parser("ising-correlation", parents=[common, ising],
                        help="next-to-diagonal correlation D^B_N against its asymptotics")
    ic.add_argument("--self-test", action="store_true", help="run with phi = psi = 1 instead")
    fg = sub.add_parser("figure", parents=[common, ising], help="data of figure 1, 2, 3 or 4")
    fg.add_argument("figure", type=int, choices=sorted(FIGURES))
    bd = sub.add_parser("bordered-det", parents=[common], help="D^B_N, D_N, F_N for a spec file")
    bd.add_argument("spec", help="key = value symbol spec file")
    bd.add_argument("--bocg", choices=("trace", "matrix", "none"), default="trace",
                    help="how to evaluate det(I - K_N) for the BOCG check column")
    return p


def config_from_args(args):
    fig = FIGURES.get(getattr(args, "figure", None))
    jh, jv, t = fig["couplings"] if fig else DEFAULT_COUPLINGS
    c = fig["c"] if fig else None
    jh = args.jh if getattr(args, "jh", None) is not None else jh
    jv = args.jv if getattr(args, "jv", None) is not None else jv
    t = args.temp if getattr(args, "temp", None) is not None else t
    c = args.c if getattr(args, "c", None) is not None else c
    Ns = parse_n(args.n)
    if not Ns:
        grid = fig["grid"] if fig else FIGURE_GRID
        Ns = [N for N in grid if N <= args.max_n]
        if not Ns:
            raise ConfigError("--max-n excludes every default N")
    elif max(Ns) > args.max_n:
        raise ConfigError(f"N = {max(Ns)} exceeds --max-n {args.max_n}")
    if min(Ns) < 2:
        raise ConfigError("N must be >= 2")
    return RunConfig(args.command, jh, jv, t, c, args.digits, Ns, args.out, args.format,
                     args.max_n, args.threads, args.stamp)


# -- shared computations ------------------------------------------------------------

class IsingSetup:
    """Ising parameters and the coefficient windows a sweep needs, built once."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.ctx = cfg.ctx
        self.params = symbols.ising_params(cfg.JhOverKb, cfg.JvOverKb, cfg.T, self.ctx)
        self.phi = symbols.ising_phi(self.params)
        self.window = max(cfg.Nlist)

    @cached_property
    def phi_series(self):
        return fourier.fourier_coeffs(self.phi, M=self.window, ctx=self.ctx)

    @cached_property
    def psi_series(self):
        return fourier.fourier_coeffs(symbols.ising_psi(self.params), M=self.window, ctx=self.ctx)

    def pole_series(self, c):
        return fourier.fourier_coeffs(symbols.pole_border(self.phi, c), M=self.window, ctx=self.ctx)


def sweep(fn, Ns, threads):
    """Apply fn over Ns; results come back in N order whatever the pool does."""
    if threads == 1:
        return [fn(N) for N in Ns]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, Ns))


def ising_rows(cfg):
    s = IsingSetup(cfg)
    ctx, ps, qs = s.ctx, s.phi_series, s.psi_series

    def row(N):
        with ctx.activate():
            db = toeplitz.bordered_det(ps, qs, N, ctx)
            dn = toeplitz.toeplitz_det(ps, N, ctx)
            rep = A.ising_second_order(s.params, N, ctx)
            return [N, db, dn, db / dn, rep.leading, rep.secondOrder, A.g_a(db, s.params, N, ctx)]

    header = ["N", "D_N^B", "D_N", "ratio", "leading", "secondOrder", "G_N^A"]
    return header, sweep(row, cfg.Nlist, cfg.threads)


def self_test_rows(cfg):
    ctx = cfg.ctx
    one = fourier.fourier_coeffs(symbols.constant(1), M=max(cfg.Nlist), ctx=ctx)

    def row(N):
        with ctx.activate():
            db = toeplitz.bordered_det(one, one, N, ctx)
            dn = toeplitz.toeplitz_det(one, N, ctx)
            return [N, db, dn, db / dn]

    return ["N", "D_N^B", "D_N", "ratio"], sweep(row, cfg.Nlist, cfg.threads)


def figure_rows(fig_id, cfg):
    fig = FIGURES[fig_id]
    s = IsingSetup(cfg)
    ctx = s.ctx
    q = fig["quantity"]
    if q == "G_N^A":
        ps, qs = s.phi_series, s.psi_series

        def value(N):
            db = toeplitz.bordered_det(ps, qs, N, ctx)
            return A.g_a(db, s.params, N, ctx)
    else:
        if cfg.c is None:
            raise ConfigError(f"figure {fig_id} needs --c")
        with ctx.activate():
            c = num(cfg.c)
        ps, bs = s.phi_series, s.pole_series(cfg.c)
        if q == "G_N^B":
            def value(N):
                return A.g_b(toeplitz.f_n_ratio(ps, bs, N, ctx), s.params, c, N, ctx)
        else:
            if not c > 1:
                raise ConfigError("figure 4 needs c > 1")

            def value(N):
                d = A.delta_n(s.params, c, N, toeplitz.f_n_ratio(ps, bs, N, ctx), ctx)
                with ctx.activate():
                    if not d > 0:
                        raise NumericError(f"Delta_{N} = {d} is not positive")
                    return gmpy2.log(d)

    def row(N):
        with ctx.activate():
            return [N, value(N)]

    rows = sweep(row, cfg.Nlist, cfg.threads)
    return ["N", q], rows, figure_fit(fig_id, rows, ctx)


def figure_fit(fig_id, rows, ctx):
    """Fit the sweep the way the figure captions do: on the multiples of 100
    when there are at least three of them, otherwise on every point."""
    pts = [(N, y) for N, y in rows if N % 100 == 0]
    if len(pts) < 3:
        pts = list(rows)
    if fig_id == 4:
        if len(pts) < 3:
            return None
        basis = fitting.mixed_basis(min(len(pts), 10) - 3)
    else:
        if len(pts) < 2:
            return None
        basis = fitting.power_basis(-(min(len(pts), 10) - 1))
    return fitting.fit_series(pts, basis, ctx)


# -- spec files ------------------------------------------------------------------------

def read_spec(path):
    """Flat ``key = value`` lines; '#' starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read spec file {path}: {exc}") from exc
    for i, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{i}: expected key = value")
        key, val = (x.strip() for x in line.split("=", 1))
        if not key or not val:
            raise ConfigError(f"{path}:{i}: empty key or value")
        if key in out:
            raise ConfigError(f"{path}:{i}: duplicate key {key!r}")
        out[key] = val
    return out


SPEC_KEYS = {"phi", "psi", "jh", "jv", "temp", "k", "c", "d", "rho",
             "a0", "a1", "b0", "hat_a0", "hat_a1", "hat_b0"}


def _rational(spec, key, default=None):
    if key not in spec:
        if default is None:
            raise ConfigError(f"spec needs {key!r}")
        return default
    try:
        return Fraction(spec[key])
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"spec key {key!r}: not a rational number: {spec[key]!r}") from exc


def symbols_from_spec(spec, ctx):
    """(phi, psi, BorderSpec or None, ising params or None) from a parsed spec."""
    for key in spec:
        if key not in SPEC_KEYS and not key.startswith(("exp.", "pole.")):
            raise ConfigError(f"unknown spec key {key!r}")
    kind = spec.get("phi", "ising")
    params = None
    if kind == "ising":
        params = symbols.ising_params(_rational(spec, "jh"), _rational(spec, "jv"),
                                      _rational(spec, "temp"), ctx)
        phi = symbols.ising_phi(params)
    elif kind == "k":
        phi = symbols.ising_phi(_rational(spec, "k"))
    elif kind == "trig":
        coeffs = {int(key[4:]): _rational(spec, key) for key in spec if key.startswith("exp.")}
        if not coeffs:
            raise ConfigError("phi = trig needs exp.<n> = value entries")
        phi = symbols.trig_exponent(coeffs)
    elif kind == "one":
        phi = symbols.constant(1)
    else:
        raise ConfigError(f"unknown phi kind {kind!r}")

    border = spec.get("psi", "ising" if kind == "ising" else "phi")
    with ctx.activate():
        if border == "ising":
            if params is None:
                raise ConfigError("psi = ising needs phi = ising")
            psi = symbols.ising_psi(params)
            bspec = None if _on_circle(params.values().c_star) else symbols.ising_border_spec(params)
        elif border == "phi":
            psi, bspec = phi, symbols.BorderSpec(a0=1)
        elif border == "one":
            psi, bspec = symbols.constant(1), symbols.BorderSpec(hat_a0=1)
        elif border == "pole":
            c, d = num(_rational(spec, "c")), num(_rational(spec, "d", Fraction(0)))
            psi = symbols.pole_border(phi, c, d)
            bspec = symbols.BorderSpec(poles=((1, c),), hat_poles=((-d, c),))
        elif border == "rational":
            bspec = _border_spec(spec)
            psi = symbols.rational_border(phi, bspec)
        else:
            raise ConfigError(f"unknown psi kind {border!r}")
    return phi, psi, bspec, params


def _on_circle(c):
    return abs(abs(c) - 1) < mpfr("1e-20")


def _border_spec(spec):
    fields = {k: _rational(spec, k, Fraction(0)) for k in ("a0", "a1", "b0", "hat_a0", "hat_a1", "hat_b0")}
    idx = sorted({int(key.split(".")[1]) for key in spec if key.startswith("pole.")})
    poles, hats = [], []
    for j in idx:
        c = _rational(spec, f"pole.{j}.c")
        poles.append((_rational(spec, f"pole.{j}.b", Fraction(0)), c))
        hats.append((_rational(spec, f"pole.{j}.hat_b", Fraction(0)), c))
    return symbols.BorderSpec(poles=tuple(poles), hat_poles=tuple(hats), **fields)


def bordered_rows(cfg, spec_path, bocg="trace"):
    ctx = cfg.ctx
    spec = read_spec(spec_path)
    phi, psi, bspec, params = symbols_from_spec(spec, ctx)
    ps = fourier.fourier_coeffs(phi, ctx=ctx)
    qs = fourier.fourier_coeffs(psi, ctx=ctx)
    W = max(cfg.Nlist)
    if ps.M < W:
        ps = fourier.fourier_coeffs(phi, M=W, ctx=ctx)
    if qs.M < W:
        qs = fourier.fourier_coeffs(psi, M=W, ctx=ctx)
    L = fourier.log_fourier_coeffs(phi, ctx=ctx)
    sz = szego.szego_constants(L, ctx)
    f_general = A.f_constant_general(L, qs, ctx)
    f_rational = _f_rational(phi, bspec, params, spec, L, ctx)
    lam = lam_inv = None
    if bocg != "none":
        lam, lam_inv = A.ratio_series(L, 1, ctx), A.ratio_series(L, -1, ctx)

    def row(N):
        with ctx.activate():
            db = toeplitz.bordered_det(ps, qs, N, ctx)
            dn = toeplitz.toeplitz_det(ps, N, ctx)
            fn = toeplitz.f_n_ratio(ps, qs, N, ctx)
            out = [N, db, dn, fn, f_rational if f_rational is not None else "", f_general]
            if bocg != "none":
                det = A.bocg_correction(L, N, bocg, ctx, lam, lam_inv)
                out.append(sz.G ** N * sz.E * det / dn - 1)
            return out

    header = ["N", "D_N^B", "D_N", "F_N", "F_inf_rational", "F_inf_general"]
    if bocg != "none":
        header.append(f"bocg_{bocg}_gap")
    return header, sweep(row, cfg.Nlist, cfg.threads)


def _f_rational(phi, bspec, params, spec, L, ctx):
    """F from the pole data; the Ising border with J_h = J_v goes through phi(rho z)."""
    if bspec is not None:
        return A.f_constant_rational(L, bspec, ctx)
    with ctx.activate():
        k = params.values().k
        rho = num(_rational(spec, "rho")) if "rho" in spec else gmpy2.sqrt(k)
        if not 1 / k < rho < k or rho == 1:
            raise ConfigError("rho must lie in (1/k, k) and differ from 1")
        L_rho = fourier.log_fourier_coeffs(symbols.scale_symbol(phi, rho), ctx=ctx)
        return A.f_constant_rational(L_rho, symbols.ising_border_spec_scaled(params, rho), ctx)


# -- output ---------------------------------------------------------------------------

def render(value, sig):
    if isinstance(value, (int, str)):
        return str(value)
    return fmt_fixed(value, sig)


def write_table(cfg, header, rows, footer=None, fh=None):
    delim = "," if cfg.format == "csv" else "\t"
    own = fh is None and cfg.outPath
    if own:
        fh = open(cfg.outPath, "w", encoding="utf-8", newline="")
    elif fh is None:
        fh = sys.stdout
    try:
        if cfg.stamp:
            now = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
            fh.write(f"# generated {now}\n")
        w = csv.writer(fh, delimiter=delim, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([render(v, cfg.sig) for v in r])
        for line in footer or []:
            fh.write(f"# {line}\n")
    finally:
        if own:
            fh.close()


def fit_footer(fit, sig):
    if fit is None:
        return []
    lines = ["fit basis: " + " + ".join(f"{fitting.coef_name(t)} {fitting.term_name(t)}"
                                         for t in fit.basis)]
    lines += [f"{fitting.coef_name(t)} = {fmt_fixed(g, sig)}" for t, g in zip(fit.basis, fit.g)]
    lines.append(f"max residual = {float(fit.residual):.3e}")
    return lines


def run(argv=None, stdout=None):
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    footer = None
    if cfg.command == "ising-correlation":
        header, rows = self_test_rows(cfg) if args.self_test else ising_rows(cfg)
    elif cfg.command == "figure":
        header, rows, fit = figure_rows(args.figure, cfg)
        footer = fit_footer(fit, cfg.sig)
    else:
        header, rows = bordered_rows(cfg, args.spec, args.bocg)
    write_table(cfg, header, rows, footer, None if cfg.outPath else (stdout or sys.stdout))
    return EXIT_OK


def main(argv=None):
    try:
        return run(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
