"""Batch command-line front end: ``xspec-eval <subcommand> [options]``.

Every subcommand writes its outputs into ``--out``. On failure a single
``xspec-eval: error: <kind>: <message>`` line goes to stderr, any files this
run already wrote are removed, and the exit status is nonzero.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import fusion, losses, netspec, scores
from .errors import ArgumentError, ParseError, XspecError
from .fid import fid as frechet_distance
from .fid import load_features
from .metrics import DEFAULT_FAR_POINTS, evaluate
from .plotting import plot_roc
from .tensorcore import read_tensor

PROG = "xspec-eval"
SUBCOMMANDS = ("eval", "fuse", "fid", "losses", "netspec", "synth")
FUSE_RULES = ("maximum", "minimum", "median", "geometric_average", "arithmetic_average", "sawf")
PROBE_FILES = ("p_real_ir", "p_fake_ir", "p_real_vis", "p_fake_vis")


@dataclass
class RunConfig:
    subcommand: str
    out: Path = Path("out")
    scores: Path | None = None
    scores_vis: Path | None = None
    scores_ir: Path | None = None
    features_x: Path | None = None
    features_y: Path | None = None
    far_points: tuple = DEFAULT_FAR_POINTS
    normalize: str = "none"
    distances: bool = False
    sawf_reference_far: float = fusion.DEFAULT_REFERENCE_FAR
    seed: int = 0
    # losses
    tensors: Path | None = None
    embeddings: Path | None = None
    loss_weights: losses.LossWeights = field(default_factory=losses.LossWeights)
    # netspec
    network: str = "discriminator"
    input_shape: tuple = (1, 256, 256)
    empirical_rf: bool = False
    rf_input_size: int | None = None
    # synth
    n_genuine: int = 500
    n_impostor: int = 500
    genuine_mean: float = 0.7
    genuine_sd: float = 0.1
    impostor_mean: float = 0.4
    impostor_sd: float = 0.1

    def validate(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise ArgumentError(f"unknown subcommand {self.subcommand!r}")
        for f in self.far_points:
            if not 0.0 < f <= 1.0:
                raise ArgumentError(f"FAR point {f} outside (0, 1]")
        if not 0.0 < self.sawf_reference_far <= 1.0:
            raise ArgumentError(f"SAWF reference FAR {self.sawf_reference_far} outside (0, 1]")
        if self.normalize not in scores.NORMALIZATIONS:
            raise ArgumentError(f"unknown normalization {self.normalize!r}")
        required = {
            "eval": ("scores",),
            "fuse": ("scores_vis", "scores_ir"),
            "fid": ("features_x", "features_y"),
            "losses": ("tensors", "embeddings"),
        }.get(self.subcommand, ())
        for name in required:
            if getattr(self, name) is None:
                raise ArgumentError(f"{self.subcommand} requires --{name.replace('_', '-')}")


class Outputs:
    """Tracks files written during a run so a failed run can remove them."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.written: list[Path] = []
        self._made_root = False

    def path(self, name: str) -> Path:
        if not self.root.exists():
            self.root.mkdir(parents=True)
            self._made_root = True
        p = self.root / name
        self.written.append(p)
        return p

    def text(self, name: str, content: str) -> Path:
        p = self.path(name)
        p.write_text(content, encoding="utf-8", newline="\n")
        return p

    def json(self, name: str, obj) -> Path:
        return self.text(name, json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")

    def rollback(self) -> None:
        for p in self.written:
            p.unlink(missing_ok=True)
        if self._made_root:
            try:
                self.root.rmdir()
            except OSError:
                pass


def _load_similarities(path, cfg: RunConfig) -> scores.ScoreSet:
    s = scores.load_scores(path)
    if cfg.distances:
        s = scores.distance_to_similarity(s)
    return scores.normalize(s, cfg.normalize)


def _run_eval(cfg: RunConfig, out: Outputs) -> None:
    s = _load_similarities(cfg.scores, cfg)
    report, roc = evaluate(s, cfg.far_points)
    out.json("report.json", report.to_dict())
    out.text("roc.csv", roc.to_csv())
    plot_roc({Path(cfg.scores).stem: roc}, out.path("roc.svg"), title="ROC")


def _comparison_csv(rows: list[tuple[str, object]], far_points) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["fusion_rule"] + [f"GAR(%)@FAR={f:g}" for f in far_points]
                    + ["EER(%)", "d-prime", "AUC"])
    for label, rep in rows:
        writer.writerow([label]
                        + [f"{100.0 * rep.gar_at_far[float(f)]:.2f}" for f in far_points]
                        + [f"{100.0 * rep.eer:.4f}", f"{rep.d_prime:.4f}", f"{rep.auc:.5f}"])
    return buf.getvalue()


def _run_fuse(cfg: RunConfig, out: Outputs) -> None:
    vis = _load_similarities(cfg.scores_vis, cfg)
    ir = _load_similarities(cfg.scores_ir, cfg)
    rows, curves = [], {}
    for label, s in (("unfused_vis", vis), ("unfused_ir", ir)):
        rep, roc = evaluate(s, cfg.far_points)
        rows.append((label, rep))
        curves[label] = roc

    for rule in FUSE_RULES:
        if rule == "sawf":
            fused, w, q_vis, q_ir = fusion.fuse_sawf(vis, ir, cfg.sawf_reference_far)
        else:
            fused = fusion.fuse_baseline(rule, vis, ir)
        rep, roc = evaluate(fused, cfg.far_points)
        if rule == "sawf":
            rep.extra = {
                "weights": {"w1": w.w1, "w2": w.w2},
                "reference_far": cfg.sawf_reference_far,
                "quality": {
                    "vis": {"gar": q_vis.gar, "d_prime": q_vis.d_prime},
                    "ir": {"gar": q_ir.gar, "d_prime": q_ir.d_prime},
                },
            }
        out.text(f"fused_{rule}.csv", scores.scores_to_csv(fused))
        out.json(f"report_{rule}.json", rep.to_dict())
        rows.append((rule, rep))
        curves[rule] = roc

    out.text("comparison.csv", _comparison_csv(rows, cfg.far_points))
    plot_roc(curves, out.path("fusion_roc.svg"), title="Fusion rules")


def _run_fid(cfg: RunConfig, out: Outputs) -> None:
    _, x = load_features(cfg.features_x)
    _, y = load_features(cfg.features_y)
    out.json("fid.json", {"fid": frechet_distance(x, y)})


def _run_losses(cfg: RunConfig, out: Outputs) -> None:
    tdir = Path(cfg.tensors)
    load = lambda name: read_tensor(tdir / f"{name}.tnsr")  # noqa: E731
    try:
        probe = losses.DiscriminatorProbe(*(load(n) for n in PROBE_FILES))
        bundle = losses.ConversionBundle(*(load(n) for n in losses.ConversionBundle.FIELDS))
    except FileNotFoundError as exc:
        raise ParseError(f"missing tensor file {exc.filename}") from None
    _, emb = load_features(cfg.embeddings)
    if emb.shape[0] != 2:
        raise ParseError(f"{cfg.embeddings}: expected exactly two embedding rows (visible, infrared)")
    out.json("losses.json", losses.evaluate_losses(probe, bundle, emb[0], emb[1], cfg.loss_weights))


def _resolve_network(name: str) -> netspec.NetworkSpec:
    if name in ("generator", "discriminator"):
        return netspec.builtin(name)
    return netspec.load_network(name)


def _run_netspec(cfg: RunConfig, out: Outputs) -> None:
    net = _resolve_network(cfg.network)
    text = netspec.shape_report(
        net, cfg.input_shape,
        empirical_seed=cfg.seed if cfg.empirical_rf else None,
        empirical_size=cfg.rf_input_size,
    )
    out.text("netspec.txt", text)
    sys.stdout.write(text)


def _run_synth(cfg: RunConfig, out: Outputs) -> None:
    s = scores.synth_scores(cfg.seed, cfg.n_genuine, cfg.n_impostor,
                            cfg.genuine_mean, cfg.genuine_sd,
                            cfg.impostor_mean, cfg.impostor_sd)
    out.text("scores.csv", scores.scores_to_csv(s))


_DISPATCH = {
    "eval": _run_eval,
    "fuse": _run_fuse,
    "fid": _run_fid,
    "losses": _run_losses,
    "netspec": _run_netspec,
    "synth": _run_synth,
}


def run(cfg: RunConfig) -> int:
    """Execute one subcommand; returns the process exit status."""
    out = Outputs(cfg.out)
    try:
        cfg.validate()
        _DISPATCH[cfg.subcommand](cfg, out)
    except XspecError as exc:
        out.rollback()
        return _fail(exc, exc.kind)
    except (OSError, ValueError) as exc:
        out.rollback()
        return _fail(exc, "io")
    return 0


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}") from None


def _shape(text: str) -> tuple:
    try:
        dims = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a C,H,W triple: {text!r}") from None
    if len(dims) != 3:
        raise argparse.ArgumentTypeError(f"not a C,H,W triple: {text!r}")
    return dims


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, far=True):
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        if far:
            p.add_argument("--far-points", type=_float_list, default=DEFAULT_FAR_POINTS,
                           help="comma-separated FAR levels (default 0.1,0.001)")
            p.add_argument("--normalize", choices=scores.NORMALIZATIONS, default="none")
            p.add_argument("--distances", action="store_true",
                           help="input scores are distances; map d -> 1/(1+d) first")

    p = sub.add_parser("eval", help="metrics, ROC table and ROC figure for one score file")
    p.add_argument("--scores", type=Path, required=True)
    common(p)

    p = sub.add_parser("fuse", help="SAWF and baseline fusion of visible and infrared scores")
    p.add_argument("--scores-vis", type=Path, required=True)
    p.add_argument("--scores-ir", type=Path, required=True)
    p.add_argument("--sawf-ref-far", dest="sawf_reference_far", type=float,
                   default=fusion.DEFAULT_REFERENCE_FAR)
    common(p)

    p = sub.add_parser("fid", help="Frechet distance between two feature CSVs")
    p.add_argument("--features-x", type=Path, required=True)
    p.add_argument("--features-y", type=Path, required=True)
    common(p, far=False)

    p = sub.add_parser("losses", help="evaluate the composite conversion loss")
    p.add_argument("--tensors", type=Path, required=True,
                   help="directory with v, i, g_v, f_i, fgv, gfi and p_* .tnsr files")
    p.add_argument("--embeddings", type=Path, required=True,
                   help="feature CSV with two 128-d rows: visible then infrared")
    p.add_argument("--lambda-cyc", type=float, default=10.0)
    p.add_argument("--lambda-syn", type=float, default=30.0)
    p.add_argument("--lambda-idr", type=float, default=10.0)
    common(p, far=False)

    p = sub.add_parser("netspec", help="shapes, parameter count and receptive field")
    p.add_argument("--network", default="discriminator",
                   help="'generator', 'discriminator' or a NetworkSpec JSON path")
    p.add_argument("--input-shape", type=_shape, default=(1, 256, 256))
    p.add_argument("--empirical-rf", action="store_true")
    p.add_argument("--rf-input-size", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    common(p, far=False)

    p = sub.add_parser("synth", help="seeded synthetic score CSV")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-genuine", type=int, default=500)
    p.add_argument("--n-impostor", type=int, default=500)
    p.add_argument("--genuine-mean", type=float, default=0.7)
    p.add_argument("--genuine-sd", type=float, default=0.1)
    p.add_argument("--impostor-mean", type=float, default=0.4)
    p.add_argument("--impostor-sd", type=float, default=0.1)
    common(p, far=False)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    if args.subcommand == "losses":
        values["loss_weights"] = losses.LossWeights(args.lambda_cyc, args.lambda_syn, args.lambda_idr)
    return RunConfig(**values)


def _fail(exc: Exception, kind: str) -> int:
    msg = " ".join(str(exc).split())
    print(f"{PROG}: error: {kind}: {msg}", file=sys.stderr)
    return 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except XspecError as exc:
        return _fail(exc, exc.kind)
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
