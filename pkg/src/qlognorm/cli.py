"""Command-line surface.

Subcommands: ingest-check, fit, sample, table, eval, cascade.  Reports are
JSON documents with a stable schema (version, command echo, seed, dataset
digest, fit blocks, ranking); tabular output is TSV with '#' header
comments.  Every command that consumes randomness takes --seed and is
bit-reproducible for a fixed seed, worker count notwithstanding.

Exit codes: 0 success, 2 usage or parameter domain error, 3 data error,
4 numerical non-convergence or divergence.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__, dist, infer, sample
from .dist import MixtureParams, QParams
from .errors import (
    ConvergenceError,
    DataError,
    DivergenceError,
    DomainError,
    QlognormError,
)
from .qalgebra import Region, q_log
from .sample import CascadeConfig, RngStream, UniformBase, QLogNormalBase

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Dataset:
    values: np.ndarray
    source: str
    transform: str
    digest: str

    @property
    def n(self) -> int:
        return int(self.values.size)

    def summary(self) -> dict:
        v = self.values
        return {
            "path": self.source,
            "digest": self.digest,
            "n": self.n,
            "transform": self.transform,
        }


@dataclass(frozen=True)
class ReportDocument:
    payload: dict

    def to_json(self) -> str:
        return json.dumps(self.payload, indent=2, sort_keys=True) + "\n"


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# ingestion

def _split_line(line: str, delim: str | None) -> list[str]:
    if delim is None:
        return [line.strip()]
    return [c.strip() for c in line.split(delim)]


def _detect_delimiter(first: str) -> str | None:
    counts = {d: first.count(d) for d in (",", "\t", ";")}
    best = max(counts, key=counts.get)
    return best if counts[best] > 0 else None


def _is_float(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def ingest(
    path: str,
    column: str | None = None,
    transform: str = "none",
    window: int = 5,
    normalize: bool = True,
) -> Dataset:
    """Read one numeric column of a delimited text file and apply the
    requested transform.

    Delimiter is auto-detected among comma, tab, semicolon; a header row is
    assumed when the first row has any non-numeric cell.  `column` picks by
    header name or zero-based index; by default the first column whose data
    cells all parse as numbers is used.  `returns` maps a positive price
    series to its log-differences; `inverse-volatility` maps returns r to
    B(t) = 1 / mean(r**2 over the trailing `window`), normalized by its own
    mean unless normalize is False.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = [ln.rstrip("\n") for ln in fh]
    lines = [
        (i + 1, ln)
        for i, ln in enumerate(raw)
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not lines:
        raise DataError(f"{path}: no data lines")
    delim = _detect_delimiter(lines[0][1])
    first_cells = _split_line(lines[0][1], delim)
    has_header = not all(_is_float(c) for c in first_cells)
    header = first_cells if has_header else None
    body = lines[1:] if has_header else lines
    if not body:
        raise DataError(f"{path}: header but no data rows")

    rows = [(no, _split_line(ln, delim)) for no, ln in body]
    ncols = len(rows[0][1])

    if column is None:
        idx = None
        for j in range(ncols):
            if all(j < len(cells) and _is_float(cells[j]) for _, cells in rows):
                idx = j
                break
        if idx is None:
            raise DataError(f"{path}: no fully numeric column found")
    elif column.lstrip("-").isdigit():
        idx = int(column)
        if not 0 <= idx < ncols:
            raise DataError(f"column index {idx} out of range (file has {ncols})")
    else:
        if header is None or column not in header:
            raise DataError(f"no column named {column!r} (header: {header})")
        idx = header.index(column)

    values = np.empty(len(rows))
    bad = []
    for k, (no, cells) in enumerate(rows):
        if idx >= len(cells) or not _is_float(cells[idx]):
            bad.append(no)
        else:
            values[k] = float(cells[idx])
    if bad:
        raise DataError(f"{path}: unparseable rows at lines {bad[:10]}")
    if not np.isfinite(values).all():
        raise DataError(f"{path}: non-finite values present")

    transform = transform.replace("-", "_")
    if transform == "none":
        out = values
    elif transform in ("returns", "inverse_volatility"):
        if (values <= 0).any():
            raise DataError("price column must be strictly positive")
        r = np.diff(np.log(values))
        if transform == "returns":
            out = r
        else:
            T = int(window)
            if T < 2:
                raise DomainError("volatility window must be >= 2")
            if r.size < T + 1:
                raise DataError(f"need more than {T + 1} prices for the window")
            sq = np.convolve(r**2, np.ones(T) / T, mode="valid")[:-1]
            if (sq == 0).any():
                kz = np.nonzero(sq == 0)[0][:10]
                raise DataError(f"zero-variance windows at offsets {kz.tolist()}")
            out = 1.0 / sq
            if normalize:
                out = out / out.mean()
    else:
        raise DomainError(f"unknown transform {transform!r}")
    return Dataset(out, path, transform, _sha256(path))


# ---------------------------------------------------------------------------
# commands

def _write_text(out: str | None, text: str) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dataset_from_args(args) -> Dataset:
    return ingest(
        args.path,
        column=args.column,
        transform=args.transform,
        window=args.window,
        normalize=not args.no_normalize,
    )


def cmd_ingest_check(args) -> int:
    t0 = time.perf_counter()
    ds = _dataset_from_args(args)
    if args.format == "tsv":
        lines = [
            "# qlognorm dataset v1",
            f"# source={ds.source} transform={ds.transform} n={ds.n}",
        ]
        lines += [f"{v:.17g}" for v in ds.values]
        _write_text(args.out, "\n".join(lines) + "\n")
        return 0
    v = ds.values
    doc = ReportDocument(
        {
            "version": SCHEMA_VERSION,
            "command": "ingest-check",
            "dataset": ds.summary(),
            "summary": {
                "min": float(v.min()),
                "max": float(v.max()),
                "mean": float(v.mean()),
                "std": float(v.std()),
                "positive_fraction": float((v > 0).mean()),
            },
            "timing_seconds": round(time.perf_counter() - t0, 6),
        }
    )
    _write_text(args.out, doc.to_json())
    return 0


def _fit_one(values: np.ndarray, model: str, f: float) -> dict:
    rep = infer.fit_mle(values, model=model, f=f)
    return {
        "model": rep.model,
        "params": rep.params,
        "loglik": rep.log_likelihood,
        "ks": rep.ks_distance,
        "aic": rep.aic,
        "converged": rep.converged,
    }


def cmd_fit(args) -> int:
    t0 = time.perf_counter()
    ds = _dataset_from_args(args)
    models = args.model or list(infer.MODELS)
    fits = []
    failures = []
    for m in models:
        try:
            fits.append(_fit_one(ds.values, m, args.f))
        except QlognormError as exc:
            failures.append({"model": m, "error": str(exc)})
    if not fits:
        raise DataError(
            "no model could be fitted: "
            + "; ".join(f"{f['model']}: {f['error']}" for f in failures)
        )
    ranking = [f["model"] for f in sorted(fits, key=lambda f: f["aic"])]
    doc = ReportDocument(
        {
            "version": SCHEMA_VERSION,
            "command": "fit",
            "seed": args.seed,
            "dataset": ds.summary(),
            "fits": fits + failures,
            "ranking": ranking,
            "timing_seconds": round(time.perf_counter() - t0, 6),
        }
    )

    xs = np.sort(ds.values)
    cols = ["x", "F_emp"] + [f"F_{f['model']}" for f in fits]
    femp = np.arange(1, xs.size + 1) / xs.size
    table = [xs, femp]
    for f in fits:
        table.append(np.asarray(infer.model_cdf(f["model"], f["params"])(xs)))
    body = "\n".join(
        "\t".join(f"{col[i]:.10g}" for col in table) for i in range(xs.size)
    )
    tsv = "# qlognorm cdf-table v1\n" + "\t".join(cols) + "\n" + body + "\n"

    if args.out:
        _write_text(args.out, doc.to_json())
        _write_text(args.out + ".cdf.tsv", tsv)
    elif args.format == "tsv":
        sys.stdout.write(tsv)
    else:
        sys.stdout.write(doc.to_json())
    return 0


def cmd_sample(args) -> int:
    params = QParams(args.q, args.mu, args.sigma)
    rng = RngStream(args.seed)
    if args.n < 0:
        raise DomainError("--n must be >= 0")
    if args.model == "mixture":
        mix = MixtureParams(params, args.f)
        draws = sample.sample_mixture(mix, args.n, rng) if args.n else np.empty(0)
        extra = f" f={args.f!r}"
    else:
        draws = sample.sample_qlognormal(params, args.n, rng) if args.n else np.empty(0)
        extra = ""
    lines = [
        "# qlognorm sample v1",
        f"# model={args.model} q={args.q!r} mu={args.mu!r} sigma={args.sigma!r}"
        f"{extra} n={args.n} seed={args.seed}",
    ]
    lines += [f"{v:.17g}" for v in draws]
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_table(args) -> int:
    params = QParams(args.q, args.mu, args.sigma)
    table = infer.ks_table_generate(
        params, replicas=args.replicas, seed=args.seed, workers=args.workers
    )
    _write_text(args.out, table.to_text())
    return 0


def _eval_grid(args) -> np.ndarray:
    if args.grid:
        return np.array([float(t) for t in args.grid.split(",")])
    if args.grid_start is None or args.grid_stop is None:
        raise DomainError("provide --grid or both --grid-start and --grid-stop")
    return np.linspace(args.grid_start, args.grid_stop, args.grid_num)


def cmd_eval(args) -> int:
    params = QParams(args.q, args.mu, args.sigma)
    grid = _eval_grid(args)
    fn = args.function
    lines = [
        "# qlognorm eval v1",
        f"# function={fn} q={args.q!r} mu={args.mu!r} sigma={args.sigma!r}",
    ]
    flagged = []
    for g in grid:
        try:
            if fn == "pdf":
                val = float(dist.pdf(g, params))
            elif fn == "cdf":
                val = float(dist.cdf(g, params))
            elif fn == "quantile":
                val = float(dist.quantile(g, params))
            elif fn == "moment":
                order = int(g)
                if order != g:
                    raise DomainError("moment orders must be integers")
                val = float(dist.raw_moment(order, params))
            elif fn == "charfn":
                z = dist.char_fn(g, params)
                lines.append(f"{g:.10g}\t{z.real:.10g}\t{z.imag:.10g}")
                continue
            else:
                raise DomainError(f"unknown function {fn!r}")
            lines.append(f"{g:.10g}\t{val:.10g}")
        except QlognormError as exc:
            flagged.append((g, str(exc)))
            lines.append(f"{g:.10g}\tnan")
    for g, msg in flagged:
        lines.append(f"# point {g:.10g}: {msg}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_cascade(args) -> int:
    if args.base == "uniform":
        base = UniformBase(args.b)
        base_desc = f"uniform(0,{args.b!r})"
    else:
        base = QLogNormalBase(QParams(args.q, args.mu, args.sigma))
        base_desc = f"q_log_normal(q={args.q!r},mu={args.mu!r},sigma={args.sigma!r})"
    config = CascadeConfig(
        q=args.q, n_factors=args.n_factors, base=base, ensemble_size=args.ensemble
    )
    rng = RngStream(args.seed)
    outcomes = sample.cascade_run(config, rng)
    values = np.array([o.value for o in outcomes])
    regions = [o.region for o in outcomes]
    n_cut = sum(r is Region.CUTOFF_ZERO for r in regions)
    n_div = sum(r is Region.DIVERGENT for r in regions)

    lines = [
        "# qlognorm cascade v1",
        f"# q={args.q!r} n_factors={args.n_factors} base={base_desc}"
        f" ensemble={args.ensemble} seed={args.seed}",
        f"# cutoff_count={n_cut} divergent_count={n_div}",
    ]
    lines += [f"{v:.17g}" for v in values]
    _write_text(args.out, "\n".join(lines) + "\n")

    finite_pos = values[np.isfinite(values) & (values > 0)]
    summary = {
        "command": "cascade",
        "version": SCHEMA_VERSION,
        "seed": args.seed,
        "q": args.q,
        "n_factors": args.n_factors,
        "base": base_desc,
        "ensemble": args.ensemble,
        "cutoff_count": n_cut,
        "divergent_count": n_div,
        "median": float(np.median(values)),
        "median_log": (
            float(np.median(np.log(finite_pos))) if finite_pos.size else None
        ),
    }
    if abs(args.q - 1.0) < 1e-12 and finite_pos.size >= 100:
        ly = np.log(finite_pos)
        mu, sg = float(ly.mean()), float(ly.std())
        d = infer.ks_distance(finite_pos, lambda x: _normal_cdf(np.log(x), mu, sg))
        band = 1.63 / math.sqrt(finite_pos.size)
        summary["lognormal_ks"] = {"d": d, "band": band, "pass": bool(d < band)}
    if args.q > 1.5 and args.base == "uniform" and finite_pos.size >= 1000:
        y = np.asarray(q_log(finite_pos, args.q))
        w = float(np.median(y)) - y
        w = w[w > 0]
        k = min(1000, w.size // 10)
        if k >= 10:
            summary["hill_tail_index"] = {
                "estimate": sample.hill_tail_estimate(w, k),
                "k": k,
                "levy_alpha": sample.levy_alpha(args.q),
            }
    sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0


def _normal_cdf(z, mu, sg):
    from scipy import special

    return special.ndtr((z - mu) / sg)


# ---------------------------------------------------------------------------
# parser

def _add_param_flags(sp, with_f=True):
    sp.add_argument("--q", type=float, default=1.0, help="deformation parameter")
    sp.add_argument("--mu", type=float, default=0.0, help="location")
    sp.add_argument("--sigma", type=float, default=1.0, help="scale (> 0)")
    if with_f:
        sp.add_argument("--f", type=float, default=0.5, help="mixture weight")


def _add_ingest_flags(sp):
    sp.add_argument("path", help="delimited text file")
    sp.add_argument("--column", default=None, help="column name or 0-based index")
    sp.add_argument(
        "--transform",
        choices=["none", "returns", "inverse-volatility"],
        default="none",
    )
    sp.add_argument("--window", type=int, default=5, help="volatility window T")
    sp.add_argument(
        "--no-normalize",
        action="store_true",
        help="keep inverse volatility on its raw scale",
    )


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qlognorm",
        description="deformed log-Normal distributions: fitting, sampling, tables",
    )
    p.add_argument("--version", action="version", version=f"qlognorm {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("ingest-check", help="parse a data file and summarize it")
    _add_ingest_flags(sp)
    sp.add_argument("--format", choices=["json", "tsv"], default="json")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_ingest_check)

    sp = sub.add_parser("fit", help="maximum-likelihood fits with AIC ranking")
    _add_ingest_flags(sp)
    sp.add_argument(
        "--model",
        action="append",
        choices=list(infer.MODELS),
        help="repeatable; default: all models",
    )
    sp.add_argument("--f", type=float, default=0.5, help="fixed mixture weight")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--format", choices=["json", "tsv"], default="json")
    sp.add_argument("--out", default=None, help="JSON path; CDF TSV lands beside it")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("sample", help="draw variates to a file, one per line")
    sp.add_argument("--model", choices=["q_log_normal", "mixture"],
                    default="q_log_normal")
    _add_param_flags(sp)
    sp.add_argument("--n", type=int, required=True, help="number of draws")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("table", help="Monte Carlo KS quantile table")
    _add_param_flags(sp, with_f=False)
    sp.add_argument("--replicas", type=int, default=10**5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_table)

    sp = sub.add_parser("eval", help="tabulate pdf/cdf/quantile/moment/charfn")
    sp.add_argument(
        "--function",
        choices=["pdf", "cdf", "quantile", "moment", "charfn"],
        required=True,
    )
    _add_param_flags(sp, with_f=False)
    sp.add_argument("--grid", default=None, help="comma-separated points")
    sp.add_argument("--grid-start", type=float, default=None)
    sp.add_argument("--grid-stop", type=float, default=None)
    sp.add_argument("--grid-num", type=int, default=101)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("cascade", help="simulate multiplicative cascades")
    _add_param_flags(sp, with_f=False)
    sp.add_argument("--n-factors", type=int, required=True)
    sp.add_argument("--ensemble", type=int, default=1)
    sp.add_argument("--base", choices=["uniform", "q_log_normal"], default="uniform")
    sp.add_argument("--b", type=float, default=1.0, help="uniform base upper edge")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_cascade)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConvergenceError, DivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
