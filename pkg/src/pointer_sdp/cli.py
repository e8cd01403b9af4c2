"""Command-line interface: ``pointer-sdp {oracle,train,parse,eval,stats,synth}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Logs go to stderr; data goes to the named output file or stdout.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from .cycles import CycleError
from .decoding import DEFAULT_BEAM, parse_corpus, transition_stats
from .evaluation import AlignmentError, evaluate
from .graph import GraphError, SDPFormatError, load_corpus, save_corpus
from .scorer.config import ConfigError, ModelConfig, builtin_config, load_config
from .scorer.embeddings import EmbeddingFileError, load_external_embeddings
from .scorer.model import PointerModel, ShapeError
from .scorer.train import NonFiniteLoss, TrainingError, train
from .synth import PRESETS, InfeasibleSpec, SynthSpec, generate_corpus
from .transitions import IllegalTransition, oracle, replay, write_sequences

log = logging.getLogger("pointer_sdp")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
FORMALISMS = ("DM", "PAS", "PSD", "synthetic")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    inputs: list[Path]
    output: Path | None = None
    model: Path | None = None
    config: Path | None = None
    seed: int | None = None
    beam: int = DEFAULT_BEAM
    external_emb: Path | None = None
    formalism: str | None = None

    def validate(self) -> None:
        for path in [*self.inputs, self.model, self.config, self.external_emb]:
            if path is not None and not path.is_file():
                raise UsageError(f"no such file: {path}")
        if self.output is not None and not self.output.parent.is_dir():
            raise UsageError(f"output directory does not exist: {self.output.parent}")
        if self.beam < 1:
            raise UsageError("--beam must be >= 1")


def _open_out(path: Path | None):
    if path is None:
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="\n")


def cmd_oracle(args, rc: RunConfig) -> int:
    graphs = load_corpus(rc.inputs[0])
    seqs = [oracle(g) for g in graphs]
    if args.verify:
        for k, (g, seq) in enumerate(zip(graphs, seqs)):
            rebuilt = replay(g.sentence, seq)
            if rebuilt != g or len(seq) != g.n + len(g.arcs):
                log.error("sentence %d: replay does not reproduce the gold graph", k)
                return EXIT_DATA
        log.info("verified %d sentences", len(graphs))
    out = _open_out(rc.output)
    try:
        write_sequences(seqs, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _model_config(args, rc: RunConfig) -> ModelConfig:
    config = load_config(rc.config) if rc.config else builtin_config(args.preset)
    if rc.seed is not None:
        config = config.replace(seed=rc.seed)
    if args.epochs is not None:
        config = config.replace(epochs=args.epochs)
    if args.learning_rate is not None:
        config = config.replace(initial_learning_rate=args.learning_rate)
    return config


def cmd_train(args, rc: RunConfig) -> int:
    config = _model_config(args, rc)
    corpus = load_corpus(rc.inputs[0])
    dev = load_corpus(args.dev) if args.dev else None
    external = dev_external = None
    if config.external_embedding_dimension:
        if rc.external_emb is None:
            raise UsageError("config enables external vectors; pass --external-emb")
        external = load_external_embeddings(rc.external_emb, corpus, config.external_embedding_dimension)
        if dev:
            if not args.dev_external_emb:
                raise UsageError("pass --dev-external-emb for the dev corpus")
            dev_external = load_external_embeddings(args.dev_external_emb, dev, config.external_embedding_dimension)
    if rc.formalism:
        log.info("formalism: %s", rc.formalism)

    print("epoch\tloss\tdev_lf1\tlearning_rate", flush=True)

    def report(rec):
        dev_lf1 = "" if rec.dev_lf1 is None else f"{100 * rec.dev_lf1:.2f}"
        print(f"{rec.epoch}\t{rec.loss:.6f}\t{dev_lf1}\t{rec.learning_rate:.6g}", flush=True)

    result = train(corpus, config, dev, external, dev_external, callback=report)
    result.model.save(rc.output)
    log.info("saved model from epoch %d to %s", result.best_epoch, rc.output)
    return EXIT_OK


def cmd_parse(args, rc: RunConfig) -> int:
    model = PointerModel.load(rc.model)
    graphs = load_corpus(rc.inputs[0])
    external = None
    dim = model.config.external_embedding_dimension
    if dim:
        if rc.external_emb is None:
            raise UsageError("model uses external vectors; pass --external-emb")
        external = load_external_embeddings(rc.external_emb, graphs, dim)
    preds = parse_corpus(
        model, [g.sentence for g in graphs], rc.beam, external, jobs=args.jobs, model_path=rc.model
    )
    save_corpus(preds, rc.output)
    return EXIT_OK


def cmd_eval(args, rc: RunConfig) -> int:
    pred = load_corpus(rc.inputs[0])
    gold = load_corpus(rc.inputs[1])
    print(evaluate(pred, gold).table())
    return EXIT_OK


def cmd_stats(args, rc: RunConfig) -> int:
    graphs = load_corpus(rc.inputs[0])
    model = None
    if args.mode == "model":
        if rc.model is None:
            raise UsageError("--mode model needs --model")
        model = PointerModel.load(rc.model)
    stats = transition_stats(graphs, model, rc.beam if model is not None else 1)
    out = _open_out(rc.output)
    try:
        out.write("sentence_id\tn\ttransitions\n")
        for sid, n, count in stats.rows:
            out.write(f"{sid}\t{n}\t{count}\n")
        out.write(
            f"# slope={stats.slope:.4f}\tintercept={stats.intercept:.4f}\tr2={stats.r2:.4f}"
            f"\tarcs_per_word={stats.arc_ratio:.4f}\tsingletons={100 * stats.singleton_share:.1f}%\n"
        )
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_synth(args, rc: RunConfig) -> int:
    ratio, share = PRESETS[args.preset] if args.preset else (0.79, 0.23)
    if args.arc_ratio is not None:
        ratio = args.arc_ratio
    if args.singleton_share is not None:
        share = args.singleton_share
    spec = SynthSpec(args.min_len, args.max_len, ratio, share, args.vocab_size, args.labels)
    graphs = generate_corpus(args.num_sentences, spec, seed=rc.seed or 0)
    if rc.output is None:
        from .graph import write_jsonl_corpus

        write_jsonl_corpus(graphs, sys.stdout)
    else:
        save_corpus(graphs, rc.output)
        load_corpus(rc.output)  # the written file must read back cleanly
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pointer-sdp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, output_required=False):
        p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
        p.add_argument("-o", "--output", type=Path, required=output_required)
        p.add_argument("--seed", type=int)
        p.add_argument("--formalism", choices=FORMALISMS)

    p = sub.add_parser("oracle", help="write the oracle transition sequence of every gold graph")
    p.add_argument("corpus", type=Path)
    p.add_argument("--verify", action="store_true", help="replay each sequence and diff against gold")
    common(p)

    p = sub.add_parser("train", help="train a model and save the best checkpoint")
    p.add_argument("corpus", type=Path)
    p.add_argument("--dev", type=Path)
    p.add_argument("--config", type=Path)
    p.add_argument("--preset", choices=("desk", "full", "full_bert"), default="desk")
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--external-emb", type=Path)
    p.add_argument("--dev-external-emb", type=Path)
    common(p, output_required=True)

    p = sub.add_parser("parse", help="parse a corpus with a trained model")
    p.add_argument("corpus", type=Path)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--beam", type=int, default=DEFAULT_BEAM)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--external-emb", type=Path)
    common(p, output_required=True)

    p = sub.add_parser("eval", help="score predicted graphs against gold graphs")
    p.add_argument("pred", type=Path)
    p.add_argument("gold", type=Path)
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = sub.add_parser("stats", help="transition counts against sentence length")
    p.add_argument("corpus", type=Path)
    p.add_argument("--mode", choices=("oracle", "model"), default="oracle")
    p.add_argument("--model", type=Path)
    p.add_argument("--beam", type=int, default=1)
    common(p)

    p = sub.add_parser("synth", help="generate a random labelled DAG corpus")
    p.add_argument("-n", "--num-sentences", type=int, default=100)
    p.add_argument("--min-len", type=int, default=5)
    p.add_argument("--max-len", type=int, default=30)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--arc-ratio", type=float)
    p.add_argument("--singleton-share", type=float)
    p.add_argument("--vocab-size", type=int, default=200)
    p.add_argument("--labels", type=int, default=6)
    common(p)
    return parser


COMMANDS = {
    "oracle": cmd_oracle,
    "train": cmd_train,
    "parse": cmd_parse,
    "eval": cmd_eval,
    "stats": cmd_stats,
    "synth": cmd_synth,
}


def _run_config(args) -> RunConfig:
    if args.command == "eval":
        inputs = [args.pred, args.gold]
    elif args.command == "synth":
        inputs = []
    else:
        inputs = [args.corpus]
    if args.command == "train" and args.dev:
        inputs.append(args.dev)
    return RunConfig(
        command=args.command,
        inputs=inputs,
        output=getattr(args, "output", None),
        model=getattr(args, "model", None),
        config=getattr(args, "config", None),
        seed=getattr(args, "seed", None),
        beam=getattr(args, "beam", DEFAULT_BEAM),
        external_emb=getattr(args, "external_emb", None),
        formalism=getattr(args, "formalism", None),
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        rc = _run_config(args)
        rc.validate()
        return COMMANDS[args.command](args, rc)
    except UsageError as exc:
        print(f"pointer-sdp: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonFiniteLoss as exc:
        print(f"pointer-sdp: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (
        SDPFormatError,
        GraphError,
        CycleError,
        IllegalTransition,
        AlignmentError,
        EmbeddingFileError,
        ShapeError,
        ConfigError,
        InfeasibleSpec,
        TrainingError,
        OSError,
    ) as exc:
        print(f"pointer-sdp: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
