"""Command-line harness: sweeps, bound reports, semigroup lab, selftest.

Subcommands
-----------
sweep     evaluate cross-section methods over a kR / rho / n grid and
          write a CSV (optionally rendering a figure alongside):
          ``scatter sweep --preset fig5-1 --out fig51.csv --plot``
          ``scatter sweep --n 1.125 --kr 0.1:30:0.1 --methods mie,semigroup,rg --out sweep.csv``
bounds    Born validity bounds for one (chi, kR) point:
          ``scatter bounds --chi 0.1 --kr 1``
lab       desk-scale Green-operator laboratory; writes trace.csv,
          resolvent.csv, skin.csv (and a PNG with --plot):
          ``scatter lab --voxels 6 --chi=-0.5i --outdir labout``
selftest  oracle-agreement and invariant suite, JSON summary, nonzero
          exit on failure.

Configuration may also come from a JSON file (``--config``); explicit
flags win on conflict.  ``SCATTER_THREADS`` caps sweep parallelism.
All numeric CSV cells are printed with %.12g; undefined values appear as
the explicit sentinel ``na`` and divergent bounds as ``divergent``.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from . import approx, bounds, greenop, mie, semigroup
from .approx import Method
from .config import ScatterConfig
from .selftest import FAULT_NAMES, run_selftest

LAB_VOXEL_CAP = 500

NA = "na"
DIVERGENT = "divergent"

_METHOD_ALIASES = {
    "mie": Method.MIE,
    "rayleigh_gans": Method.RAYLEIGH_GANS,
    "rg": Method.RAYLEIGH_GANS,
    "semigroup": Method.SEMIGROUP,
    "vdh": Method.VAN_DE_HULST,
    "van_de_hulst": Method.VAN_DE_HULST,
    "evans_fournier": Method.EVANS_FOURNIER,
    "ef": Method.EVANS_FOURNIER,
    "rayleigh_quartic": Method.RAYLEIGH_QUARTIC,
    "quartic": Method.RAYLEIGH_QUARTIC,
}

CSV_HEADER = ["kR", "rho", "method", "sigma_n", "amp_re", "amp_im"]


@dataclass
class SweepSpec:
    """Resolved sweep request: refractive indices, kR grid, methods."""

    methods: list[Method]
    n_values: list[float]
    kr_values: list[float] | None = None
    rho_values: list[float] | None = None
    axis: str = "kr"  # kr | rho | n
    mie_terms: int | None = None
    mie_margin: int = 10
    wavenumber: float = 1.0
    out_path: str = "sweep.csv"

    def points(self) -> list[tuple[float, float]]:
        """(n, kR) pairs in deterministic order."""
        pts = []
        for n in self.n_values:
            if self.rho_values is not None:
                if n <= 1.0:
                    raise ValueError("rho axis needs n > 1 to recover kR")
                krs = [rho / (2.0 * (n - 1.0)) for rho in self.rho_values]
            else:
                krs = list(self.kr_values)
            pts.extend((n, kr) for kr in krs)
        return pts


def _parse_range(text: str) -> list[float]:
    """START:STOP:STEP inclusive grid with integer stepping."""
    try:
        start, stop, step = (float(tok) for tok in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"range must be START:STOP:STEP, got {text!r}") from exc
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot parse complex value {text!r}") from exc


def _parse_methods(text: str) -> list[Method]:
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if tok not in _METHOD_ALIASES:
            raise argparse.ArgumentTypeError(
                f"unknown method {tok!r}; choose from {sorted(set(_METHOD_ALIASES))}"
            )
        m = _METHOD_ALIASES[tok]
        if m not in out:
            out.append(m)
    if not out:
        raise argparse.ArgumentTypeError("method list is empty")
    return out


_PRESETS = {
    "fig5-1": dict(
        n="1.125",
        kr="0.1:30:0.1",
        methods="mie,rayleigh_gans,semigroup",
        mie_terms=200,
    ),
    "fig5-2": dict(
        n="1.5,1.3333333333333333",
        rho="0.25:20:0.25",
        methods="mie,semigroup,vdh,evans_fournier",
        mie_terms=100,
    ),
    "fig5-3": dict(
        n="1.0:2.5:0.01",
        kr=f"{math.pi}:{2 * math.pi}:{math.pi}",
        methods="mie,semigroup,vdh,evans_fournier",
        mie_terms=50,
        axis="n",
    ),
}


def _fmt(value: float | None) -> str:
    if value is None:
        return NA
    if math.isinf(value):
        return DIVERGENT
    if math.isnan(value):
        return NA
    return format(value, ".12g")


def _evaluate_point(
    spec: SweepSpec, n: float, kR: float, method: Method
) -> tuple[float | None, complex | None]:
    """(sigma_n, forward amplitude) for one sweep point; None marks failure."""
    cfg = ScatterConfig.from_index(spec.wavenumber, kR / spec.wavenumber, n)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", approx.ValidityWarning)
            if method is Method.MIE:
                trunc = (
                    mie.MieTruncation.fixed(spec.mie_terms)
                    if spec.mie_terms
                    else mie.MieTruncation.auto(spec.mie_margin)
                )
                return mie.mie_sigma(cfg, trunc).sigma_n, None
            if method is Method.RAYLEIGH_GANS:
                res = approx.rayleigh_gans(cfg)
                return res.sigma_n, res.forward_amplitude
            if method is Method.SEMIGROUP:
                res = approx.semigroup_amplitude(cfg)
                return res.sigma_n, res.forward_amplitude
            if method is Method.VAN_DE_HULST:
                return approx.van_de_hulst(2.0 * (n - 1.0) * kR), None
            if method is Method.EVANS_FOURNIER:
                return approx.evans_fournier(cfg), None
            if method is Method.RAYLEIGH_QUARTIC:
                return (
                    approx.rayleigh_quartic(cfg) / cfg.geometric_cross_section,
                    None,
                )
    except Exception as exc:
        print(f"warning: {method.value} failed at n={n}, kR={kR}: {exc}", file=sys.stderr)
        return None, None
    raise AssertionError(f"unhandled method {method}")


def run_sweep(spec: SweepSpec) -> list[dict]:
    """Evaluate all sweep points; row order is deterministic."""
    tasks = [
        (n, kR, method) for (n, kR) in spec.points() for method in spec.methods
    ]
    threads = int(os.environ.get("SCATTER_THREADS", "1") or "1")
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda t: _evaluate_point(spec, *t), tasks))
    else:
        results = [_evaluate_point(spec, *t) for t in tasks]
    rows = []
    for (n, kR, method), (sigma_n, amp) in zip(tasks, results):
        rows.append(
            dict(
                n=n,
                kR=kR,
                rho=2.0 * (n - 1.0) * kR,
                method=method.value,
                sigma_n=sigma_n,
                amp=amp,
            )
        )
    return rows


def write_sweep_csv(rows: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            amp = row["amp"]
            writer.writerow(
                [
                    _fmt(row["kR"]),
                    _fmt(row["rho"]),
                    row["method"],
                    _fmt(row["sigma_n"]),
                    _fmt(amp.real) if amp is not None else NA,
                    _fmt(amp.imag) if amp is not None else NA,
                ]
            )


def _cmd_sweep(args: argparse.Namespace) -> int:
    if args.preset:
        preset = dict(_PRESETS[args.preset])
        axis = preset.pop("axis", "rho" if "rho" in preset else "kr")
        n_text = args.n if args.n is not None else preset["n"]
        kr_text = args.kr if args.kr is not None else preset.get("kr")
        rho_text = args.rho if args.rho is not None else preset.get("rho")
        methods = _parse_methods(args.methods) if args.methods else _parse_methods(preset["methods"])
        mie_terms = args.mie_terms if args.mie_terms is not None else preset.get("mie_terms")
    else:
        axis = "rho" if args.rho else "kr"
        if args.n is None or (args.kr is None and args.rho is None) or args.methods is None:
            print("error: custom sweeps need --n, --kr or --rho, and --methods", file=sys.stderr)
            return 2
        n_text, kr_text, rho_text = args.n, args.kr, args.rho
        methods = _parse_methods(args.methods)
        mie_terms = args.mie_terms
    n_values = _parse_range(n_text) if ":" in n_text else [float(t) for t in n_text.split(",")]
    if len(n_values) > 1 and axis == "kr" and ":" in n_text:
        axis = "n"
    spec = SweepSpec(
        methods=methods,
        n_values=n_values,
        kr_values=_parse_range(kr_text) if kr_text else None,
        rho_values=_parse_range(rho_text) if rho_text else None,
        axis=axis,
        mie_terms=mie_terms,
        mie_margin=args.mie_margin,
        wavenumber=args.wavenumber,
        out_path=args.out,
    )
    rows = run_sweep(spec)
    write_sweep_csv(rows, spec.out_path)
    print(f"wrote {len(rows)} rows to {spec.out_path}")
    if args.plot:
        from .plotting import render_sweep_figure

        png = args.plot if isinstance(args.plot, str) else os.path.splitext(spec.out_path)[0] + ".png"
        render_sweep_figure(rows, spec.axis, png, title=args.preset or "")
        print(f"rendered {png}")
    return 0


def _cmd_bounds(args: argparse.Namespace) -> int:
    chi = args.chi
    if chi.imag != 0:
        print("error: bound report requires real chi", file=sys.stderr)
        return 2
    cfg = ScatterConfig.make(args.wavenumber, args.kr / args.wavenumber, chi.real)
    rep = bounds.bound_report(cfg, rel_err_threshold=args.threshold)
    fields = [
        ("chi", chi.real),
        ("kR", args.kr),
        ("g_norm_bound", rep.g_norm_bound),
        ("gs_bound", rep.gs_bound),
        ("born_field_error", rep.born_field_error),
        ("cross_section_error", rep.cross_section_error),
        ("criterion_perturbative", rep.criterion_perturbative),
        ("criterion_phase", rep.criterion_phase),
    ]
    if args.format == "csv":
        lines = [",".join(name for name, _ in fields)]
        lines.append(
            ",".join(
                str(v).lower() if isinstance(v, bool) else _fmt(v) for _, v in fields
            )
        )
        text = "\n".join(lines) + "\n"
    else:
        width = max(len(name) for name, _ in fields)
        text = "\n".join(
            f"{name:<{width}}  {str(v).lower() if isinstance(v, bool) else _fmt(v)}"
            for name, v in fields
        ) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_lab(args: argparse.Namespace) -> int:
    cfg = ScatterConfig.make(args.wavenumber, args.kr / args.wavenumber, 0.1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", greenop.DiscretizationWarning)
        grid = greenop.build_grid(cfg, args.voxels)
    if grid.n_voxels > LAB_VOXEL_CAP:
        print(
            f"error: N = {grid.n_voxels} voxels exceeds the desk-scale cap ({LAB_VOXEL_CAP})",
            file=sys.stderr,
        )
        return 2
    G = greenop.assemble_green(grid, cfg.k)
    E = greenop.plane_wave(grid, cfg.k)
    os.makedirs(args.outdir, exist_ok=True)

    tau_max = args.tau_max if args.tau_max else 50.0 / np.linalg.norm(G.entries, 2)
    trace = semigroup.stability_probe(G, E, tau_max)
    trace_rows = list(zip(trace.taus.tolist(), trace.norms.tolist()))
    with open(os.path.join(args.outdir, "trace.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tau", "norm"])
        for tau, nrm in trace_rows:
            w.writerow([_fmt(tau), _fmt(nrm)])

    chis = [args.chi] if not args.chi_list else [_parse_complex(t) for t in args.chi_list.split(",")]
    with open(os.path.join(args.outdir, "resolvent.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["chi", "rel_err_vs_direct"])
        for chi in chis:
            if chi.imag >= 0:
                w.writerow([str(chi), NA])
                continue
            direct = greenop.solve_born(G, chi, E)
            via = semigroup.bochner_resolvent(G, chi, E)
            rel = float(
                np.linalg.norm(via.values - direct.values) / np.linalg.norm(direct.values)
            )
            w.writerow([str(chi), _fmt(rel)])

    mags = tuple(float(t) for t in args.chi_mags.split(","))
    probe = semigroup.SkinProbe.bump(grid, args.probe_support, mags)
    skin = semigroup.skin_effect_probe(G, E, probe)
    with open(os.path.join(args.outdir, "skin.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["chi_mag", "functional"])
        for mag, val in skin:
            w.writerow([_fmt(mag), _fmt(val)])

    print(
        f"lab run: N = {grid.n_voxels}, wrote trace.csv, resolvent.csv, skin.csv in {args.outdir}"
    )
    if args.plot:
        from .plotting import render_lab_figure

        png = os.path.join(args.outdir, "lab.png")
        render_lab_figure(trace_rows, skin, png)
        print(f"rendered {png}")
    return 0


def _cmd_selftest(args: argparse.Namespace) -> int:
    ok, results = run_selftest(inject_fault=args.inject_fault)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    summary = {
        "all_passed": bool(ok),
        "checks": {r.name: {"passed": bool(r.passed), "detail": r.detail} for r in results},
    }
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(summary, fh, indent=2)
        print(f"wrote {args.json}")
    else:
        print(json.dumps(summary))
    return 0 if ok else 1


def _apply_config_defaults(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Fold --config JSON values in as parser defaults; flags win.

    Defaults are pushed onto every subparser since argparse resolves
    subcommand arguments in the subparser's own namespace.
    """
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        parser.error("--config needs a path")
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        parser.error("config file must hold a JSON object")
    parser.set_defaults(**data)
    for sub in getattr(parser, "scatter_subparsers", {}).values():
        sub.set_defaults(**data)
    return argv[:idx] + argv[idx + 2 :]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scatter",
        description="Scattering cross-section sweeps, Born bounds, and the semigroup lab.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="evaluate methods over a parameter grid, write CSV")
    sw.add_argument("--preset", choices=sorted(_PRESETS), help="figure-reproduction preset")
    sw.add_argument("--n", help="refractive index: value, comma list, or START:STOP:STEP")
    sw.add_argument("--kr", help="kR grid START:STOP:STEP")
    sw.add_argument("--rho", help="phase-shift grid START:STOP:STEP (rho = 2(n-1)kR)")
    sw.add_argument("--methods", help="comma list: mie,rg,semigroup,vdh,ef,quartic")
    sw.add_argument("--mie-terms", type=int, dest="mie_terms", help="fixed Mie truncation")
    sw.add_argument("--mie-margin", type=int, dest="mie_margin", default=10)
    sw.add_argument("--wavenumber", "-k", type=float, default=1.0)
    sw.add_argument("--out", default="sweep.csv")
    sw.add_argument("--plot", nargs="?", const=True, default=False, help="render PNG beside the CSV")
    sw.add_argument("--config", help="JSON defaults; flags win")
    sw.set_defaults(func=_cmd_sweep)

    bd = sub.add_parser("bounds", help="Born validity bounds at one (chi, kR)")
    bd.add_argument("--chi", type=_parse_complex, required=True)
    bd.add_argument("--kr", type=float, required=True)
    bd.add_argument("--threshold", type=float, default=0.1, help="small-sphere factor threshold")
    bd.add_argument("--wavenumber", "-k", type=float, default=1.0)
    bd.add_argument("--format", choices=["text", "csv"], default="text")
    bd.add_argument("--out")
    bd.add_argument("--config", help="JSON defaults; flags win")
    bd.set_defaults(func=_cmd_bounds)

    lab = sub.add_parser("lab", help="semigroup laboratory on a voxel grid")
    lab.add_argument("--voxels", type=int, default=6, help="voxels per diameter")
    lab.add_argument("--chi", type=_parse_complex, default=-0.5j)
    lab.add_argument("--chi-list", dest="chi_list", help="comma list for resolvent.csv")
    lab.add_argument("--kr", type=float, default=1.5)
    lab.add_argument("--tau-max", type=float, dest="tau_max")
    lab.add_argument("--chi-mags", dest="chi_mags", default="10,100,1000")
    lab.add_argument("--probe-support", dest="probe_support", type=float, default=0.55)
    lab.add_argument("--wavenumber", "-k", type=float, default=1.0)
    lab.add_argument("--outdir", default="lab_out")
    lab.add_argument("--plot", action="store_true")
    lab.add_argument("--config", help="JSON defaults; flags win")
    lab.set_defaults(func=_cmd_lab)

    st = sub.add_parser("selftest", help="oracle and invariant suite")
    st.add_argument("--json", help="write JSON summary here")
    st.add_argument("--inject-fault", dest="inject_fault", choices=FAULT_NAMES)
    st.set_defaults(func=_cmd_selftest)

    parser.scatter_subparsers = {"sweep": sw, "bounds": bd, "lab": lab, "selftest": st}
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    argv = _apply_config_defaults(parser, argv)
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
