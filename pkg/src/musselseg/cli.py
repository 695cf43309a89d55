"""Command-line entry point: ``musselseg {segment,cluster,synth,eval-db,bench}``.

Exit codes: 0 success, 1 runtime or input error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import codec
from .core import FeatureDataset, MwoConfig, Partition
from .engine import run, thread_count
from .errors import ConfigError, MusselsegError, ParseError
from .evaluation import DbParams, db_index, kmeans_baseline
from .features import FeatureMode, csv_to_dataset, image_to_dataset, read_csv_table
from .synthetic import BlobSpec, gen_blobs, gen_rgb_squares, gen_six_colors

log = logging.getLogger("musselseg")

EXIT_OK, EXIT_ERROR, EXIT_USAGE = 0, 1, 2
IMAGE_SUFFIXES = (".png", ".ppm", ".pnm")
SYNTH_KINDS = ("blobs", "rgb-squares", "six-colors")


class UsageError(Exception):
    pass


def _add_config_flags(p):
    d = MwoConfig()
    g = p.add_argument_group("optimizer")
    g.add_argument("--pop", type=int, default=d.population, help="population size N")
    g.add_argument("--kmax", type=int, default=d.k_max, help="maximum number of clusters")
    g.add_argument("--iters", type=int, default=d.max_iter, help="iterations")
    g.add_argument("--seed", type=int, default=d.seed, help="random seed (64-bit unsigned)")
    g.add_argument("--top", type=int, default=None, help="elite count t (default: ceil(N/10))")
    g.add_argument("--gamma", type=float, default=d.gamma, help="levy walk scale")
    g.add_argument("--mu", type=float, default=d.mu, help="levy walk exponent")
    g.add_argument("--levy-cap", type=float, default=d.levy_cap, help="upper cap on the levy step")
    g.add_argument("--fixed-levy", action="store_true",
                   help="draw each mussel's levy step once instead of every iteration")
    g.add_argument("--threshold", type=float, default=d.activation_threshold,
                   help="activation threshold")
    g.add_argument("--sample", type=int, default=d.subsample_cap,
                   help="points used for fitness evaluation before subsampling kicks in")
    g.add_argument("--stagnation", type=int, default=d.stagnation_window,
                   help="stop after this many iterations without improvement (0 = off)")
    g.add_argument("--q-order", type=int, default=2, help="DB scatter order q")
    g.add_argument("--t-order", type=int, default=2, help="DB center distance order t")
    g.add_argument("--no-timing", action="store_true",
                   help="omit wall-clock times so outputs are byte-reproducible")


def _add_feature_flags(p):
    p.add_argument("--features", default="rgbxy", choices=[m.value for m in FeatureMode if m.value != "raw"],
                   help="pixel feature space")
    p.add_argument("--spatial-weight", type=float, default=1.0,
                   help="weight of the XY columns (0 drops them)")


def _config(args, seed=None) -> MwoConfig:
    try:
        return MwoConfig(
            population=args.pop, k_max=args.kmax, top_count=args.top, gamma=args.gamma,
            mu=args.mu, activation_threshold=args.threshold, max_iter=args.iters,
            seed=args.seed if seed is None else seed, subsample_cap=args.sample,
            levy_cap=args.levy_cap, levy_resample=not args.fixed_levy,
            stagnation_window=args.stagnation,
        )
    except ConfigError as exc:
        raise UsageError(str(exc)) from None


def _db_params(args) -> DbParams:
    try:
        return DbParams(args.q_order, args.t_order)
    except MusselsegError as exc:
        raise UsageError(str(exc)) from None


def _read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise MusselsegError(f"{path}: {exc.strerror}") from None


def segment_image(image, mode, spatial_weight, config, db_params, workers=None):
    dataset = image_to_dataset(image, mode, spatial_weight)
    result, _ = run(dataset, config, db_params=db_params, workers=workers)
    return result


def cmd_segment(args) -> int:
    if args.spatial_weight < 0:
        raise UsageError("--spatial-weight must be >= 0")
    config, params = _config(args), _db_params(args)
    data = _read_bytes(args.image)
    image = codec.decode_image(data)
    result = segment_image(image, args.features, args.spatial_weight, config, params)
    h, w = image.shape[:2]
    out = args.out or str(Path(args.image).with_suffix("")) + ".seg.png"
    codec.write_image(out, codec.render_segmentation((h, w), result.labels, image, args.render))
    if args.manifest:
        codec.write_manifest(codec.build_manifest(
            result, feature_mode=args.features, spatial_weight=args.spatial_weight,
            digest=codec.digest_bytes(data), timing=not args.no_timing), args.manifest)
    if args.trace:
        codec.write_trace(result.trace, args.trace)
    print(f"k_eff={result.k_eff} rf={result.rf:.6g} db={result.db:.6g} -> {out}")
    return EXIT_OK


def cmd_cluster(args) -> int:
    config, params = _config(args), _db_params(args)
    data = _read_bytes(args.csv)
    text = data.decode("utf-8")
    dataset = csv_to_dataset(text)
    result, _ = run(dataset, config, db_params=params)
    header, rows = read_csv_table(text)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header + ["cluster"])
    for (_, row), label in zip(rows, result.labels):
        writer.writerow(row + [int(label)])
    out = args.out or str(Path(args.csv).with_suffix("")) + ".clustered.csv"
    Path(out).write_text(buf.getvalue(), encoding="utf-8")
    if args.manifest:
        codec.write_manifest(codec.build_manifest(
            result, feature_mode="raw", spatial_weight=0.0, digest=codec.digest_bytes(data),
            timing=not args.no_timing), args.manifest)
    if args.trace:
        codec.write_trace(result.trace, args.trace)
    print(f"k_eff={result.k_eff} rf={result.rf:.6g} db={result.db:.6g} -> {out}")
    return EXIT_OK


def blobs_csv(dataset: FeatureDataset) -> str:
    lines = ["x,y,label"]
    for (x, y), lab in zip(dataset.points, dataset.reference_labels):
        lines.append(f"{float(x)!r},{float(y)!r},{int(lab)}")
    return "\n".join(lines) + "\n"


def cmd_synth(args) -> int:
    if args.kind == "blobs":
        Path(args.out).write_text(blobs_csv(gen_blobs(BlobSpec(seed=args.seed))), encoding="utf-8")
    elif args.kind == "rgb-squares":
        codec.write_image(args.out, gen_rgb_squares())
    else:
        codec.write_image(args.out, gen_six_colors())
    return EXIT_OK


def _load_labeled(args):
    header, rows = read_csv_table(_read_bytes(args.data).decode("utf-8"))
    reserved = {"label", "cluster", args.label_column}
    feature_cols = [i for i, name in enumerate(header) if name not in reserved]
    if args.labels:
        lab_header, lab_rows = read_csv_table(_read_bytes(args.labels).decode("utf-8"))
        col = lab_header.index(args.label_column) if args.label_column in lab_header else 0
        labels = [r[col].strip() for _, r in lab_rows]
    else:
        if args.label_column not in header:
            raise ParseError(f"no column named {args.label_column!r}", 1)
        col = header.index(args.label_column)
        labels = [r[col].strip() for _, r in rows]
    if len(labels) != len(rows):
        raise MusselsegError(f"{len(labels)} labels for {len(rows)} data rows")
    values = []
    for line, r in rows:
        try:
            values.append([float(r[i]) for i in feature_cols])
        except ValueError as exc:
            raise ParseError(f"non-numeric value ({exc})", line) from None
    return FeatureDataset(np.array(values), tuple(header[i] for i in feature_cols)), np.array(labels)


def cmd_eval_db(args) -> int:
    params = _db_params(args)
    dataset, labels = _load_labeled(args)
    part = Partition.from_labels(dataset.points, labels)
    if part.k_eff < 2:
        raise MusselsegError("DB undefined for k < 2")
    db = db_index(dataset, part, params)
    print(f"db={codec._fmt_float(db)} q_order={params.q_order} t_order={params.t_order} k={part.k_eff}")
    if args.manifest:
        codec.write_manifest({"db": db, "db_orders": {"q_order": params.q_order, "t_order": params.t_order},
                              "input_digest": codec.digest_bytes(_read_bytes(args.data)),
                              "k": part.k_eff}, args.manifest)
    return EXIT_OK


# -- bench -------------------------------------------------------------------

@dataclass
class BenchRow:
    path: str
    repeat: int
    seed: int = 0
    k_eff: int = 0
    rf: float = float("nan")
    db: float = float("nan")
    wall_ms: float = float("nan")
    kmeans_db: float = float("nan")
    error: str = ""


@dataclass
class BenchReport:
    rows: list
    mean_db: float
    variance_db: float

    @property
    def failures(self) -> int:
        return sum(1 for r in self.rows if r.error)


def derive_seed(master: int, digest: str, repeat: int = 0) -> int:
    """Per-image seed: master XOR the first 64 bits of the content hash, plus the repeat index."""
    h = int(digest.split(":", 1)[1][:16], 16)
    return ((master ^ h) + repeat) % 2**64


def _bench_one(path, rel, repeat, args, params, baseline_k):
    row = BenchRow(path=rel, repeat=repeat)
    try:
        data = path.read_bytes()
        image = codec.decode_image(data)
        row.seed = derive_seed(args.seed, codec.digest_bytes(data), repeat)
        config = _config(args, seed=row.seed)
        dataset = image_to_dataset(image, args.features, args.spatial_weight)
        result, _ = run(dataset, config, db_params=params, workers=1)
        row.k_eff, row.rf, row.db = result.k_eff, result.rf, result.db
        row.wall_ms = float("nan") if args.no_timing else result.wall_ms
        if baseline_k:
            if dataset.n > config.subsample_cap:
                # same evaluation budget as the optimizer
                idx = np.sort(np.random.default_rng(row.seed).choice(
                    dataset.n, config.subsample_cap, replace=False))
                dataset = dataset.subset(idx)
            row.kmeans_db = db_index(dataset, kmeans_baseline(dataset, baseline_k, rng=row.seed), params)
    except UsageError:
        raise
    except (MusselsegError, OSError, ValueError) as exc:
        row.error = str(exc).replace("\n", " ")
    return row


def bench(directory, args) -> BenchReport:
    directory = Path(directory)
    if not directory.is_dir():
        raise MusselsegError(f"{directory}: not a directory")
    files = sorted(p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
    if not files:
        raise MusselsegError(f"{directory}: no images found")
    params = _db_params(args)
    _config(args)  # usage errors before any work
    baseline_k = args.k if args.baseline == "kmeans" else 0
    jobs = [(p, p.name, r) for p in files for r in range(args.repeats)]
    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda j: _bench_one(*j, args, params, baseline_k), jobs))
    else:
        rows = [_bench_one(*j, args, params, baseline_k) for j in jobs]
    dbs = np.array([r.db for r in rows if not r.error and np.isfinite(r.db)])
    mean = float(dbs.mean()) if dbs.size else float("nan")
    var = float(dbs.var()) if dbs.size else float("nan")
    return BenchReport(rows, mean, var)


def bench_csv(report: BenchReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path", "repeat", "seed", "k_eff", "rf", "db", "wall_ms", "kmeans_db", "error"])
    f = codec._fmt_csv
    for r in report.rows:
        if r.error:
            w.writerow([r.path, r.repeat, r.seed, "", "", "", "", "", r.error])
        else:
            w.writerow([r.path, r.repeat, r.seed, r.k_eff, f(r.rf), f(r.db),
                        "" if np.isnan(r.wall_ms) else f"{r.wall_ms:.3f}",
                        "" if np.isnan(r.kmeans_db) else f(r.kmeans_db), ""])
    w.writerow(["#aggregate", "", "", "", "", f(report.mean_db), "", "", f"variance={f(report.variance_db)}"])
    return buf.getvalue()


def cmd_bench(args) -> int:
    if args.baseline == "kmeans" and (args.k is None or args.k < 2):
        raise UsageError("--baseline kmeans needs --k >= 2")
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    report = bench(args.directory, args)
    text = bench_csv(report)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    print(f"mean={report.mean_db:.6g}, variance={report.variance_db:.6g}")
    if report.failures:
        print(f"warning: {report.failures} image(s) failed", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="musselseg", description=__doc__.splitlines()[0],
                                     formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment an image", formatter_class=fmt)
    p.add_argument("image")
    p.add_argument("--out", help="rendered segmentation (PNG, or PPM by suffix)")
    p.add_argument("--manifest", help="result manifest (JSON)")
    p.add_argument("--trace", help="convergence trace (CSV)")
    p.add_argument("--render", default=codec.GRAY_LABELS, choices=codec.RENDER_STYLES)
    _add_feature_flags(p)
    _add_config_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("cluster", help="cluster CSV points", formatter_class=fmt)
    p.add_argument("csv")
    p.add_argument("-o", "--out", help="output CSV with an added cluster column")
    p.add_argument("--manifest")
    p.add_argument("--trace")
    _add_config_flags(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("synth", help="write a synthetic input", formatter_class=fmt)
    p.add_argument("kind", choices=SYNTH_KINDS)
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--seed", type=int, default=0, help="seed for blobs")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval-db", help="Davies-Bouldin index of labeled CSV data", formatter_class=fmt)
    p.add_argument("data")
    p.add_argument("--labels", help="CSV file holding the labels (else a column of DATA)")
    p.add_argument("--label-column", default="label")
    p.add_argument("--q-order", type=int, default=2)
    p.add_argument("--t-order", type=int, default=2)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_eval_db)

    p = sub.add_parser("bench", help="segment every image in a folder", formatter_class=fmt)
    p.add_argument("directory")
    p.add_argument("--report", help="report CSV (default: standard output)")
    p.add_argument("--repeats", type=int, default=1, help="runs per image")
    p.add_argument("--baseline", choices=["none", "kmeans"], default="none",
                   help="add a fixed-k K-means DB column")
    p.add_argument("--k", type=int, default=None, help="k for the K-means baseline")
    _add_feature_flags(p)
    _add_config_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except (MusselsegError, OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
