"""Command line interface: ``lungtex <subcommand> ...``.

Exit codes: 0 success, 1 usage, 2 data/model error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import LungtexError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("lungtex")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _print_json(doc) -> None:
    print(json.dumps(doc, sort_keys=True, indent=1))


def _config(args):
    from .pipeline.config import load_config
    return load_config(args.config).with_seed(args.seed)


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_synth(args):
    from .pipeline.synth import make_synthetic_dataset
    cfg = _config(args)
    path = make_synthetic_dataset(args.n, cfg.seed, args.out, args.size, args.imbalance)
    print(path)


def cmd_ingest(args):
    from .pipeline.manifest import ingest
    cfg = _config(args)
    m = ingest(args.manifest, cfg.labels or None)
    counts = {}
    for lab in m.labels:
        counts[lab] = counts.get(lab, 0) + 1
    _print_json({"rows": len(m), "labels": counts,
                 "fallback": [r.id for r in m.rows if r.needs_fallback]})


def cmd_extract(args):
    from .pipeline.features import extract_features, write_errors_csv, write_features_csv
    from .pipeline.manifest import ingest
    cfg = _config(args)
    out = _out(args)
    table, errors = extract_features(ingest(args.manifest, cfg.labels or None), cfg, args.workers)
    write_features_csv(out / "features.csv", table)
    write_errors_csv(out / "errors.csv", errors)
    for e in errors:
        print(f"warning: {e.id}: {e.message}", file=sys.stderr)
    print(f"{len(table)} rows x {len(table.names)} features, {len(errors)} errors -> {out}")


def cmd_cluster(args):
    from .pipeline.features import read_features_csv
    from .pipeline.run import _dump_json, run_cluster
    cfg = _config(args)
    out = _out(args)
    table = read_features_csv(args.features)
    rep = run_cluster(table, cfg)
    _dump_json(out / "cluster_report.json", rep.to_dict())
    rep.write_scatter(out / "scatter.csv", table.labels)
    _print_json(rep.to_dict())


def cmd_train(args):
    from .pipeline.features import read_features_csv
    from .pipeline.run import _dump_json, run_train, save_trained
    cfg = _config(args)
    out = _out(args)
    table = read_features_csv(args.features)
    report, clf = run_train(table, cfg)
    _dump_json(out / "cv_report.json", report.to_dict())
    h = save_trained(out / "model.json", table, clf, report, cfg)
    bp = report.best_params
    print(f"cv accuracy {report.summary} ({report.score_line}); "
          f"best {bp['criterion']} depth {bp['max_depth']}; model sha256 {h}")


def cmd_stats(args):
    from .pipeline.config import stage_seed
    from .pipeline.features import read_features_csv
    from .pipeline.run import run_stats, write_stats
    cfg = _config(args)
    out = _out(args)
    res = run_stats(read_features_csv(args.features), cfg.alpha, stage_seed(cfg.seed, "stats"))
    write_stats(res, out / "stats_tukey.csv", out / "stats_summary.csv")
    ok = [r for r in res if r.status == "ok"]
    sig = sum(any(t.significant for t in r.tukey) for r in ok)
    print(f"{len(ok)} features tested, {len(res) - len(ok)} skipped, "
          f"{sig} with at least one significant pair -> {out}")


def cmd_classify(args):
    from .pipeline.run import classify
    _print_json(classify(args.image, args.mask, args.model, _config(args)))


def cmd_serve(args):
    from .pipeline.persist import load_model
    from .pipeline.service import make_server
    saved = load_model(args.model)
    server = make_server(saved, _config(args), args.host, args.port)
    host, port = server.server_address[:2]
    print(f"serving model {saved.model_hash} on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


def cmd_run(args):
    from .pipeline.run import run_all
    res = run_all(args.manifest, _config(args), args.out, args.workers)
    print(f"artifacts in {res.out_dir}; content hash {res.content_hash}")


def cmd_config(args):
    text = _config(args).dumps()
    if args.write:
        Path(args.write).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> Parser:
    common = Parser(add_help=False)
    common.add_argument("--config", help="key-value config file (see `lungtex config`)")
    common.add_argument("--seed", type=int, help="master seed, overrides the config")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    p = Parser(prog="lungtex", description="Texture-based chest radiograph classification pipeline.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    s = sub.add_parser("synth", parents=[common], help="write a synthetic dataset")
    s.add_argument("--n", type=int, default=100, help="images per class")
    s.add_argument("--size", type=int, default=128)
    s.add_argument("--imbalance", type=float, default=1.0)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("ingest", parents=[common], help="validate a manifest")
    s.add_argument("manifest")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("extract", parents=[common], help="manifest -> features.csv")
    s.add_argument("manifest")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_extract)

    for name, fn, help_ in (("cluster", cmd_cluster, "X-means on a feature table"),
                            ("train", cmd_train, "grid-searched decision tree"),
                            ("stats", cmd_stats, "Shapiro-Wilk, ANOVA and Tukey-Kramer")):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("features")
        s.set_defaults(func=fn)

    s = sub.add_parser("classify", parents=[common], help="classify one image, JSON on stdout")
    s.add_argument("image")
    s.add_argument("--mask")
    s.add_argument("--model", required=True)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("serve", parents=[common], help="HTTP inference service")
    s.add_argument("--model", required=True)
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8080)
    s.set_defaults(func=cmd_serve)

    s = sub.add_parser("run", parents=[common], help="all stages, hashed artifacts")
    s.add_argument("manifest")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("config", parents=[common], help="print the effective config")
    s.add_argument("--write", help="write to this path instead of stdout")
    s.set_defaults(func=cmd_config)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except LungtexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:  # noqa: BLE001
        log.exception("internal error")
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
