"""End-to-end orchestration: train, predict, evaluate, enhance, tune.

Everything here is deterministic given a run configuration: seeds drive
sample shuffling, enhancement draws and weight initialization, so two
runs from one manifest produce byte-identical checkpoints, metrics and
prediction files.
"""

from __future__ import annotations

import logging
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import actions as actions_mod
from . import corpus, enhancer, glyphs, model, patches
from .alignment import align
from .corpus import InflectionSample

logger = logging.getLogger(__name__)

DEFAULT_EPOCHS = 60
DEFAULT_PATIENCE = 10
DEFAULT_DEV_FRACTION = 0.1

GRID_HIDDEN = (32, 64, 128)
GRID_EMBED = (8, 16)
GRID_PATCHES = (False, True)
GRID_ENHANCE = (0, 1, 5)


class PipelineError(ValueError):
    """Raised with a stage-named message when any stage fails."""


@dataclass(frozen=True)
class RunConfig:
    train_path: str
    dev_path: Optional[str] = None
    table_path: Optional[str] = None
    hidden_size: int = 64
    embed_size: int = 16
    use_patches: bool = False
    enhance_factor: int = 0
    min_support: int = 1
    beam_size: int = 1
    # 0 = plain teacher forcing; N >= 1 = early-update beam training
    train_beam: int = 0
    epochs: int = DEFAULT_EPOCHS
    patience: int = DEFAULT_PATIENCE
    seed: int = 1
    dev_fraction: float = DEFAULT_DEV_FRACTION

    def __post_init__(self) -> None:
        if not 0 <= self.enhance_factor <= enhancer.MAX_FACTOR:
            raise PipelineError("enhance_factor must be in 0..5 (0 = off)")
        if self.use_patches and not self.table_path:
            raise PipelineError("use_patches requires a patch table file")
        if self.beam_size < 1 or self.epochs < 1 or self.patience < 1:
            raise PipelineError("beam_size, epochs and patience must be >= 1")
        if self.train_beam < 0:
            raise PipelineError("train_beam must be >= 0 (0 = off)")


@dataclass
class TrainedModel:
    params: model.ModelParams
    config: model.ModelConfig
    codec: model.Codec
    table: patches.PatchTable
    # per-epoch rows: (epoch, mean_train_loss, dev_accuracy, dev_avg_lev)
    metrics: list[tuple[int, float, float, float]]
    best_epoch: int


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(f"{name}: {exc}") from exc


def load_table(path: str) -> patches.PatchTable:
    with open(path, encoding="utf-8") as handle:
        return patches.parse_table(handle.read())


def prepare_samples(cfg: RunConfig) -> tuple[list[InflectionSample], list[InflectionSample]]:
    """Read training data, settle the dev set, then enhance the train part.

    When no dev file is given the dev set is split off before enhancement
    so it only ever contains real samples.
    """
    train = _stage("parse-train", corpus.read_unimorph, cfg.train_path)
    if not train:
        raise PipelineError("parse-train: no samples in training file")
    if cfg.dev_path:
        dev = _stage("parse-dev", corpus.read_unimorph, cfg.dev_path)
        if not dev:
            raise PipelineError("parse-dev: no samples in dev file")
    else:
        train, dev = _stage(
            "split-dev", corpus.split_dev, train, cfg.dev_fraction, cfg.seed
        )
    if cfg.enhance_factor > 0:
        extra = _stage(
            "enhance", enhancer.enhance, train,
            factor=cfg.enhance_factor, min_support=cfg.min_support,
            rng=random.Random(cfg.seed),
        )
        train = train + extra
    return train, dev


def build_codec(
    train: Sequence[InflectionSample], cfg: RunConfig
) -> tuple[model.Codec, patches.PatchTable, corpus.Alphabet]:
    alphabet = _stage("alphabet", corpus.extract_alphabet, train)
    feats = _stage("feature-vocab", corpus.extract_feature_vocab, train)
    if cfg.use_patches:
        table = _stage("patch-table", load_table, cfg.table_path)
        table = patches.filter_for_alphabet(table, alphabet)
    else:
        table = patches.EMPTY_TABLE
    vocab = actions_mod.ActionVocab.build(
        table.class_count, corpus.target_symbols(train)
    )
    codec = model.Codec(alphabet.symbols, alphabet.sentinel, feats.tags, vocab)
    return codec, table, alphabet


def derive_oracles(
    train: Sequence[InflectionSample],
    table: patches.PatchTable,
    gap: str,
) -> list[list[actions_mod.Action]]:
    oracles = []
    for sample in train:
        aligned = align(sample.lemma, sample.target, table, gap)
        oracles.append(actions_mod.derive_oracle(aligned, table))
    return oracles


def _clone_params(params: model.ModelParams) -> model.ModelParams:
    tensors = {name: arr.copy() for name, arr in params.tensors().items()}
    gru = lambda prefix: model.GRUParams(
        **{gate: tensors[f"{prefix}.{gate}"] for gate in
           ("w_z", "u_z", "b_z", "w_r", "u_r", "b_r", "w_h", "u_h", "b_h")}
    )
    return model.ModelParams(
        char_emb=tensors["char_emb"],
        action_emb=tensors["action_emb"],
        enc_fwd=gru("enc_fwd"),
        enc_bwd=gru("enc_bwd"),
        dec=gru("dec"),
        proj_w=tensors["proj_w"],
        proj_b=tensors["proj_b"],
    )


def evaluate_model(
    params: model.ModelParams,
    codec: model.Codec,
    table: patches.PatchTable,
    samples: Sequence[InflectionSample],
    beam_size: int = 1,
) -> tuple[float, float]:
    """(accuracy, avg Levenshtein) of decoding against the gold targets."""
    preds, golds = [], []
    for sample in samples:
        output, _ = model.beam_decode(
            params, codec, table, sample.lemma, sample.features, beam_size
        )
        preds.append(output)
        golds.append(sample.target or "")
    return corpus.accuracy(preds, golds), corpus.avg_levenshtein(preds, golds)


def train_model(cfg: RunConfig) -> TrainedModel:
    """Full training pipeline with early stopping on dev accuracy."""
    train, dev = prepare_samples(cfg)
    codec, table, alphabet = build_codec(train, cfg)
    oracles = _stage("oracle", derive_oracles, train, table, alphabet.gap)

    config = codec.config(cfg.hidden_size, cfg.embed_size, cfg.use_patches, cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    params = model.init_params(config, rng)
    opt = model.init_adam(params)

    best_params = _clone_params(params)
    # improvement is lexicographic: higher accuracy, then lower Levenshtein
    best_key = (-1.0, float("inf"))
    best_epoch = 0
    stale = 0
    metrics: list[tuple[int, float, float, float]] = []
    indices = list(range(len(train)))
    for epoch in range(1, cfg.epochs + 1):
        random.Random(cfg.seed * 1_000_003 + epoch).shuffle(indices)
        losses = []
        for i in indices:
            if cfg.train_beam:
                losses.append(model.train_sample_beam(
                    params, opt, codec, train[i], oracles[i], cfg.train_beam
                ))
            else:
                losses.append(
                    model.train_sample(params, opt, codec, train[i], oracles[i])
                )
        dev_acc, dev_lev = evaluate_model(params, codec, table, dev, beam_size=1)
        metrics.append((epoch, sum(losses) / len(losses), dev_acc, dev_lev))
        logger.info(
            "epoch %d: loss %.4f, dev acc %.4f, dev lev %.4f",
            epoch, metrics[-1][1], dev_acc, dev_lev,
        )
        if (dev_acc, -dev_lev) > best_key:
            best_key = (dev_acc, -dev_lev)
            best_epoch = epoch
            best_params = _clone_params(params)
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    return TrainedModel(best_params, config, codec, table, metrics, best_epoch)


def metrics_tsv(metrics: Sequence[tuple[int, float, float, float]]) -> str:
    lines = ["epoch\ttrain_loss\tdev_accuracy\tdev_avg_levenshtein"]
    for epoch, loss, acc, lev in metrics:
        lines.append(f"{epoch}\t{loss:.6f}\t{acc:.6f}\t{lev:.6f}")
    return "".join(line + "\n" for line in lines)


def cmd_train(
    cfg: RunConfig, checkpoint_path: str, metrics_path: Optional[str] = None
) -> TrainedModel:
    trained = train_model(cfg)
    model.save_checkpoint_file(
        checkpoint_path, trained.params, trained.config, trained.codec, trained.table
    )
    if metrics_path:
        with open(metrics_path, "w", encoding="utf-8") as handle:
            handle.write(metrics_tsv(trained.metrics))
    return trained


def cmd_predict(
    checkpoint_path: str,
    data_path: str,
    out_path: str,
    beam_size: int = 1,
) -> list[InflectionSample]:
    """Decode a covered (2-column) test file into 3-column predictions.

    An empty decode falls back to the lemma so the output stays valid
    UniMorph TSV.
    """
    params, _, codec, table = model.load_checkpoint_file(checkpoint_path)
    samples = _stage("parse-test", corpus.read_unimorph, data_path, covered=True)
    predictions = []
    for sample in samples:
        output, _ = model.beam_decode(
            params, codec, table, sample.lemma, sample.features, beam_size
        )
        if not output:
            logger.warning("empty prediction for %r; falling back to lemma", sample.lemma)
            output = sample.lemma
        predictions.append(InflectionSample(sample.lemma, output, sample.features))
    with open(out_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(corpus.serialize_samples(predictions))
    return predictions


def cmd_evaluate(pred_path: str, gold_path: str) -> tuple[float, float]:
    """Returns (accuracy percent, avg Levenshtein) of two 3-column files."""
    preds = _stage("parse-pred", corpus.read_unimorph, pred_path)
    golds = _stage("parse-gold", corpus.read_unimorph, gold_path)
    if len(preds) != len(golds):
        raise PipelineError(
            f"evaluate: line count mismatch ({len(preds)} vs {len(golds)})"
        )
    acc = corpus.accuracy([p.target for p in preds], [g.target for g in golds])
    lev = corpus.avg_levenshtein([p.target for p in preds], [g.target for g in golds])
    return acc * 100.0, lev


def cmd_enhance(
    data_path: str, factor: int, min_support: int, seed: int, out_path: str
) -> list[InflectionSample]:
    samples = _stage("parse-train", corpus.read_unimorph, data_path)
    extra = _stage(
        "enhance", enhancer.enhance, samples,
        factor=factor, min_support=min_support, rng=random.Random(seed),
    )
    with open(out_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(corpus.serialize_samples(extra))
    return extra


def parse_ranges(spec: str) -> tuple[tuple[int, int], ...]:
    """Range spec: 'default' or comma-separated hex ranges like 0020-007E."""
    if spec == "default":
        return patches.DEFAULT_RANGES
    out = []
    for part in spec.split(","):
        lo, dash, hi = part.strip().partition("-")
        if not dash:
            raise PipelineError(f"patches: bad range {part!r}")
        try:
            out.append((int(lo, 16), int(hi, 16)))
        except ValueError:
            raise PipelineError(f"patches: bad range {part!r}") from None
    return tuple(out)


def cmd_patches(
    font: str,
    out_path: str,
    ranges: str = "default",
    grid: tuple[int, int] = glyphs.DEFAULT_GRID,
    point_size: int = glyphs.DEFAULT_POINT_SIZE,
    threshold: float = patches.DEFAULT_THRESHOLD,
    alphabet_from: Optional[str] = None,
    base_overrides: Optional[str] = None,
) -> patches.PatchTable:
    config = glyphs.RenderConfig(font, grid=grid, point_size=point_size)
    base = None
    if base_overrides:
        with open(base_overrides, encoding="utf-8") as handle:
            base = patches.BaseMap(patches.parse_base_overrides(handle.read()))
    table = _stage(
        "patches", patches.prepopulate, parse_ranges(ranges), config,
        base=base, threshold=threshold,
    )
    if alphabet_from:
        samples = _stage("parse-alphabet", corpus.read_unimorph, alphabet_from)
        table = patches.filter_for_alphabet(table, corpus.extract_alphabet(samples))
    with open(out_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(patches.serialize_table(table))
    return table


def cmd_oracle(table_path: Optional[str], data_path: str) -> list[str]:
    """One line of space-separated action tokens per sample."""
    table = load_table(table_path) if table_path else patches.EMPTY_TABLE
    samples = _stage("parse-train", corpus.read_unimorph, data_path)
    alphabet = corpus.extract_alphabet(samples)
    lines = []
    for sample in samples:
        aligned = align(sample.lemma, sample.target, table, alphabet.gap)
        lines.append(actions_mod.serialize_actions(
            actions_mod.derive_oracle(aligned, table)
        ))
    return lines


def cmd_align(table_path: Optional[str], pairs_path: str) -> list[str]:
    """Debug view: aligned lemma, aligned target and cost per input line."""
    table = load_table(table_path) if table_path else patches.EMPTY_TABLE
    samples = _stage("parse-pairs", corpus.read_unimorph, pairs_path)
    alphabet = corpus.extract_alphabet(samples)
    lines = []
    for sample in samples:
        pair = align(sample.lemma, sample.target, table, alphabet.gap)
        lines.append(f"{pair.lemma_aligned}\t{pair.target_aligned}\t{pair.cost}")
    return lines


# ---------------------------------------------------------------------------
# hyperparameter grid


@dataclass(frozen=True)
class TuneCell:
    hidden_size: int
    embed_size: int
    use_patches: bool
    enhance_factor: int
    seed: int

    def key(self) -> tuple:
        return (
            self.hidden_size, self.embed_size, self.use_patches,
            self.enhance_factor, self.seed,
        )


@dataclass
class CellResult:
    cell: TuneCell
    status: str  # ok / failed
    dev_accuracy: float = 0.0
    dev_levenshtein: float = 0.0
    wall_seconds: float = 0.0
    note: str = ""


@dataclass
class TuneReport:
    results: list[CellResult]
    best: Optional[TuneCell] = None


def grid_cells(
    seeds: Sequence[int],
    hidden_grid: Sequence[int] = GRID_HIDDEN,
    embed_grid: Sequence[int] = GRID_EMBED,
    patch_grid: Sequence[bool] = GRID_PATCHES,
    enhance_grid: Sequence[int] = GRID_ENHANCE,
) -> list[TuneCell]:
    cells = []
    for hidden in hidden_grid:
        for embed in embed_grid:
            for use_patches in patch_grid:
                for factor in enhance_grid:
                    for seed in seeds:
                        cells.append(TuneCell(hidden, embed, use_patches, factor, seed))
    return cells


def _run_cell(job: tuple[TuneCell, RunConfig]) -> CellResult:
    cell, base = job
    started = time.perf_counter()
    try:
        cfg = replace(
            base,
            hidden_size=cell.hidden_size,
            embed_size=cell.embed_size,
            use_patches=cell.use_patches,
            enhance_factor=cell.enhance_factor,
            seed=cell.seed,
            table_path=base.table_path if cell.use_patches else None,
        )
        trained = train_model(cfg)
        _, _, best_acc, best_lev = trained.metrics[trained.best_epoch - 1]
        note = ""
        if cell.use_patches and trained.table.class_count == 0:
            note = "empty_patch_table"
        return CellResult(
            cell, "ok", best_acc, best_lev,
            time.perf_counter() - started, note,
        )
    except Exception as exc:  # cell failures must not kill the sweep
        return CellResult(
            cell, "failed", 0.0, 0.0, time.perf_counter() - started, str(exc)[:200]
        )


def select_best(results: Sequence[CellResult]) -> Optional[TuneCell]:
    """Max dev accuracy; ties -> lower Levenshtein, smaller model, lexicographic."""
    ok = [r for r in results if r.status == "ok"]
    if not ok:
        return None
    ranked = sorted(
        ok,
        key=lambda r: (
            -r.dev_accuracy,
            r.dev_levenshtein,
            r.cell.hidden_size,
            r.cell.embed_size,
            str(r.cell.key()),
        ),
    )
    return ranked[0].cell


def cmd_tune(
    base: RunConfig,
    seeds: Sequence[int],
    jobs: int = 1,
    hidden_grid: Sequence[int] = GRID_HIDDEN,
    embed_grid: Sequence[int] = GRID_EMBED,
    enhance_grid: Sequence[int] = GRID_ENHANCE,
) -> TuneReport:
    """Run the full Cartesian grid; failures are recorded, never fatal."""
    if not base.dev_path:
        raise PipelineError("tune: a dev file is required")
    patch_grid = GRID_PATCHES if base.table_path else (False,)
    cells = grid_cells(seeds, hidden_grid, embed_grid, patch_grid, enhance_grid)
    jobs_args = [(cell, base) for cell in cells]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, jobs_args))
    else:
        results = [_run_cell(job) for job in jobs_args]
    return TuneReport(results, select_best(results))


def tune_report_tsv(report: TuneReport, include_wall: bool = True) -> str:
    """Serialize a report; wall time is the only non-deterministic column."""
    header = "hidden\tembed\tuse_patches\tenhance\tseed\tstatus\tdev_accuracy\tdev_avg_levenshtein\tnote"
    if include_wall:
        header += "\twall_seconds"
    lines = [header]
    for r in report.results:
        c = r.cell
        row = (
            f"{c.hidden_size}\t{c.embed_size}\t{int(c.use_patches)}\t"
            f"{c.enhance_factor}\t{c.seed}\t{r.status}\t"
            f"{r.dev_accuracy:.6f}\t{r.dev_levenshtein:.6f}\t{r.note}"
        )
        if include_wall:
            row += f"\t{r.wall_seconds:.3f}"
        lines.append(row)
    if report.best is not None:
        b = report.best
        lines.append(
            f"# best\t{b.hidden_size}\t{b.embed_size}\t{int(b.use_patches)}\t"
            f"{b.enhance_factor}\t{b.seed}"
        )
    return "".join(line + "\n" for line in lines)
