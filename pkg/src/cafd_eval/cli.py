"""Command-line interface.

One subcommand per pipeline: fid, cafd, iscore, modescore, kld, evaluate,
normality, hack, synth. Every subcommand emits a machine-readable JSON
document (default) or a plain-text table carrying the same information.
Exit codes: 0 success, 1 validation/data error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import linalg, metrics, normality, perturb, synth, tensor_io
from .errors import DataError, EvaluationError, NumericalError


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; 2 is reserved for
    # numerical failures here, so remap argument errors to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _mean_std_cell(entry) -> str:
    if entry is None:
        return "skipped"
    if entry["std"] is None:
        return _fmt(entry["mean"])
    return f"{_fmt(entry['mean'])} ± {_fmt(entry['std'])}"


def _marginal_from_args(args, k: int) -> tensor_io.LabelMarginal:
    if getattr(args, "real_labels", None):
        labels = tensor_io.read_labels(args.real_labels)
        counts = np.bincount(labels.labels, minlength=k)
        if counts.shape[0] > k:
            raise DataError(f"label {int(labels.labels.max())} out of range for K={k}")
        return tensor_io.LabelMarginal.from_array(counts / counts.sum())
    if getattr(args, "real_probs", None):
        return tensor_io.read_probabilities(args.real_probs).marginal()
    raise DataError("need --real-probs or --real-labels to build the real label marginal")


def _cmd_fid(args) -> dict:
    real = tensor_io.read_feature_matrix(args.real)
    gen = tensor_io.read_feature_matrix(args.gen)
    return {"command": "fid", "fid": metrics.fid(real, gen, args.epsilon_reg)}


def _cmd_cafd(args) -> dict:
    real = tensor_io.read_feature_matrix(args.real)
    gen = tensor_io.read_feature_matrix(args.gen)
    real_p = tensor_io.read_probabilities(args.real_probs)
    gen_p = tensor_io.read_probabilities(args.gen_probs)
    res = metrics.cafd(real, real_p, gen, gen_p, args.epsilon_reg)
    per_class = [None if np.isnan(v) else float(v) for v in res.per_class]
    return {
        "command": "cafd",
        "cafd": res.value,
        "per_class_frechet": per_class,
        "skipped_classes": list(res.skipped),
    }


def _cmd_iscore(args) -> dict:
    p = tensor_io.read_probabilities(args.probs)
    return {"command": "iscore", "inception_score": metrics.inception_score(p)}


def _cmd_modescore(args) -> dict:
    p = tensor_io.read_probabilities(args.probs)
    p_star = _marginal_from_args(args, p.n_classes)
    return {"command": "modescore", "mode_score": metrics.mode_score(p, p_star)}


def _cmd_kld(args) -> dict:
    gen_p = tensor_io.read_probabilities(args.gen_probs)
    p_star = _marginal_from_args(args, gen_p.n_classes)
    return {"command": "kld", "kld": metrics.label_kld(p_star, gen_p.marginal())}


def _cmd_evaluate(args) -> dict:
    real = tensor_io.read_feature_matrix(args.real)
    gen = tensor_io.read_feature_matrix(args.gen)
    real_p = tensor_io.read_probabilities(args.real_probs)
    gen_p = tensor_io.read_probabilities(args.gen_probs)
    labels = tensor_io.read_labels(args.real_labels) if args.real_labels else None
    cfg = metrics.EvalConfig(splits=args.splits, seed=args.seed, epsilon_reg=args.epsilon_reg)
    report = metrics.evaluate(real, real_p, gen, gen_p, cfg, real_labels=labels)
    doc = {"command": "evaluate"}
    doc.update(report.to_json_dict())
    return doc


def _cmd_normality(args) -> dict:
    x = tensor_io.read_feature_matrix(args.infile)
    if args.splits > 1:
        if args.seed is None:
            raise DataError("--seed is required when --splits > 1")
        subsets = normality.split_random(x, args.splits, args.seed)
    else:
        subsets = [x]
    sets = []
    for idx, sub in enumerate(subsets):
        entry = {"set": idx, "n_samples": sub.n_samples}
        if args.test == "ad":
            avg_p, comps = normality.ad_test_pca(sub, args.components)
            entry["averaged_p"] = avg_p
            entry["per_component"] = [c.to_json_dict() for c in comps]
        else:
            entry.update(normality.mardia_test(sub, args.components).to_json_dict())
        sets.append(entry)
    return {
        "command": "normality",
        "test": args.test,
        "components": args.components,
        "splits": args.splits,
        "seed": args.seed,
        "sets": sets,
    }


def _cmd_hack(args) -> dict:
    x = tensor_io.read_feature_matrix(args.infile)
    recipe = perturb.HackRecipe(swap_pair=(args.swap[0], args.swap[1]))
    basis = None
    if args.basis:
        ref = tensor_io.read_feature_matrix(args.basis)
        basis, _ = linalg.pca(ref, min(ref.n_samples, ref.dim))
    hacked = perturb.axis_permutation_hack(x, recipe, basis)
    tensor_io.write_feature_matrix(hacked, args.out)
    doc = {"command": "hack", "output": str(args.out), "swap_pair": list(recipe.swap_pair)}
    doc.update(perturb.mean_cov_preservation_check(x, hacked).to_json_dict())
    return doc


def _cmd_synth(args) -> dict:
    with open(args.spec, "r", encoding="ascii") as fh:
        spec = synth.GmmSpec.from_json(fh.read())
    x, labels, probs = synth.sample_gmm(spec, args.n)
    if args.drop_class is not None:
        x, labels, probs = synth.mode_drop(x, labels, probs, args.drop_class)
    if args.collapse is not None:
        if args.seed is None:
            raise DataError("--seed is required for --collapse pairing")
        x, labels, probs = synth.mode_collapse(
            x, labels, probs, args.collapse[0], args.collapse[1], args.blend, seed=args.seed
        )
    tensor_io.write_feature_matrix(x, args.out_features)
    tensor_io.write_labels(labels, args.out_labels)
    tensor_io.write_probabilities(probs, args.out_probs)
    return {
        "command": "synth",
        "n_samples": x.n_samples,
        "dim": x.dim,
        "files": {
            "features": str(args.out_features),
            "labels": str(args.out_labels),
            "probabilities": str(args.out_probs),
        },
    }


def _table_lines(doc: dict) -> list[str]:
    cmd = doc.get("command", "")
    lines: list[str] = []
    if cmd == "evaluate":
        split = doc.get("split_mean_std")
        for key in ("fid", "cafd", "kld", "inception_score", "mode_score"):
            cell = _fmt(doc[key])
            if split:
                cell = f"{cell}  ({_mean_std_cell(split[key])} over {split['splits']} splits)"
            lines.append(f"{key:<16} {cell}")
        skipped = doc["skipped_classes"]
        lines.append(f"{'skipped_classes':<16} {', '.join(map(str, skipped)) or '(none)'}")
        lines.append("")
        lines.append(f"{'class':<8} distance")
        per_class = doc["per_class_frechet"]
        for i, v in enumerate(per_class):
            if split:
                cell = _mean_std_cell(split["per_class_frechet"][i])
            else:
                cell = "skipped" if v is None else _fmt(v)
            lines.append(f"{i:<8} {cell}")
        if split:
            lines.append(f"{'average':<8} {_mean_std_cell(split['cafd'])}")
        else:
            lines.append(f"{'average':<8} {_fmt(doc['cafd'])}")
        return lines
    if cmd == "normality":
        lines.append(f"test={doc['test']} components={doc['components']} splits={doc['splits']}")
        if doc["test"] == "ad":
            lines.append(f"{'set':<6} {'n':<8} averaged_p")
            for entry in doc["sets"]:
                lines.append(
                    f"{entry['set']:<6} {entry['n_samples']:<8} {_fmt(entry['averaged_p'])}"
                )
        else:
            lines.append(f"{'set':<6} {'n':<8} {'skewness_p':<14} {'kurtosis_p':<14} headline_p")
            for entry in doc["sets"]:
                lines.append(
                    f"{entry['set']:<6} {entry['n_samples']:<8} "
                    f"{_fmt(entry['skewness_p']):<14} {_fmt(entry['kurtosis_p']):<14} "
                    f"{_fmt(entry['headline_p'])}"
                )
        return lines
    if cmd == "cafd":
        lines.append(f"{'cafd':<16} {_fmt(doc['cafd'])}")
        lines.append(
            f"{'skipped_classes':<16} {', '.join(map(str, doc['skipped_classes'])) or '(none)'}"
        )
        lines.append(f"{'class':<8} distance")
        for i, v in enumerate(doc["per_class_frechet"]):
            lines.append(f"{i:<8} {'skipped' if v is None else _fmt(v)}")
        return lines
    for key, value in doc.items():
        if key == "command":
            continue
        if isinstance(value, float):
            value = _fmt(value)
        lines.append(f"{key:<16} {value}")
    return lines


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cafd-eval", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--format", choices=("json", "table"), default="json")
        p.add_argument("--output", default=None, help="write the report here instead of stdout")

    def add_eps(p):
        p.add_argument(
            "--epsilon-reg",
            type=float,
            default=0.0,
            help="diagonal ridge added to covariances before the Frechet trace term",
        )

    p = sub.add_parser("fid", help="Frechet distance between two feature sets")
    p.add_argument("--real", required=True)
    p.add_argument("--gen", required=True)
    add_eps(p)
    add_common(p)
    p.set_defaults(func=_cmd_fid)

    p = sub.add_parser("cafd", help="class-aware Frechet distance")
    p.add_argument("--real", required=True)
    p.add_argument("--real-probs", required=True)
    p.add_argument("--gen", required=True)
    p.add_argument("--gen-probs", required=True)
    add_eps(p)
    add_common(p)
    p.set_defaults(func=_cmd_cafd)

    p = sub.add_parser("iscore", help="inception score of a posterior matrix")
    p.add_argument("--probs", required=True)
    add_common(p)
    p.set_defaults(func=_cmd_iscore)

    p = sub.add_parser("modescore", help="mode score of generated posteriors")
    p.add_argument("--probs", required=True, help="generated posteriors")
    p.add_argument("--real-probs", default=None)
    p.add_argument("--real-labels", default=None)
    add_common(p)
    p.set_defaults(func=_cmd_modescore)

    p = sub.add_parser("kld", help="KL(real marginal || generated marginal)")
    p.add_argument("--gen-probs", required=True)
    p.add_argument("--real-probs", default=None)
    p.add_argument("--real-labels", default=None)
    add_common(p)
    p.set_defaults(func=_cmd_kld)

    p = sub.add_parser("evaluate", help="full evaluation report")
    p.add_argument("--real", required=True)
    p.add_argument("--real-probs", required=True)
    p.add_argument("--gen", required=True)
    p.add_argument("--gen-probs", required=True)
    p.add_argument("--real-labels", default=None)
    p.add_argument("--splits", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    add_eps(p)
    add_common(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("normality", help="AD / Mardia normality diagnostics")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--test", choices=("ad", "mardia"), default="ad")
    p.add_argument("--components", type=int, default=None)
    p.add_argument("--splits", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    add_common(p)
    p.set_defaults(func=_cmd_normality)

    p = sub.add_parser("hack", help="axis-permutation hack of a feature set")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--swap", type=int, nargs=2, default=(0, 1), metavar=("A", "B"))
    p.add_argument(
        "--basis",
        default=None,
        help="fit the PCA basis on this feature file instead of the input",
    )
    add_common(p)
    p.set_defaults(func=_cmd_hack)

    p = sub.add_parser("synth", help="sample a GMM scenario to FVEC files")
    p.add_argument("--spec", required=True, help="GmmSpec JSON file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out-features", required=True)
    p.add_argument("--out-labels", required=True)
    p.add_argument("--out-probs", required=True)
    p.add_argument("--drop-class", type=int, default=None)
    p.add_argument("--collapse", type=int, nargs=2, default=None, metavar=("A", "B"))
    p.add_argument("--blend", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=None, help="pairing seed for --collapse")
    add_common(p)
    p.set_defaults(func=_cmd_synth)

    return parser


def _emit_error(exc: Exception) -> None:
    doc = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(doc), file=sys.stderr)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse handled --help or a usage error
        return int(exc.code or 0)
    try:
        doc = args.func(args)
    except NumericalError as exc:
        _emit_error(exc)
        return 2
    except EvaluationError as exc:
        _emit_error(exc)
        return 1
    except OSError as exc:
        _emit_error(exc)
        return 1
    if args.format == "table":
        text = "\n".join(_table_lines(doc)) + "\n"
    else:
        text = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
