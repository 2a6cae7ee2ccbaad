"""Batch command-line surface: plot-ready CSV/JSON plus a run manifest.

Every command writes its outputs and a manifest.json (command, resolved
config, input digests, seeds, tool version, timestamp) into --out.
Numeric CSV fields are formatted with %.12g so identical inputs and seeds
reproduce byte-identical files across platforms. Exit codes: 1 for data
validation failures, 2 for usage errors.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import sys
from datetime import datetime, timezone

import click
import numpy as np

from . import __version__, diachronic, evalkit, narrative, synthgen
from .corpus import (
    Corpus,
    CorpusError,
    EMOTION_LABELS,
    group_conversations,
    parse_corpus,
    trim_credits,
    write_corpus,
)
from .emotion_stats import (
    DEFAULT_EPSILON,
    DEFAULT_MIN_FILMS,
    DEFAULT_MIN_N,
    DEFAULT_N_BOOT,
    bootstrap_ci_statistic,
    dirichlet_entropy,
    emotional_range,
    genre_emotional_range,
    smooth_simplex,
    _fit_from_suff,
    DEFAULT_TOL,
    DEFAULT_MAX_ITER,
)
from .phrase_graph import (
    DEFAULT_KNN_K,
    DEFAULT_RESOLUTION,
    DEFAULT_RESTARTS,
    DEFAULT_TAU,
    PhraseGroup,
    build_knn_graph,
    leiden_partition,
    make_phrase_groups,
)

DEFAULT_SEED = 13


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.12g" % float(x)


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _resolve_seed(ctx: click.Context, seed) -> int:
    """--seed flag, then SCREENLAB_SEED, then the package default."""
    src = ctx.get_parameter_source("seed")
    if src is not None and src.name == "COMMANDLINE":
        return int(seed)
    env = os.environ.get("SCREENLAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise click.UsageError(f"SCREENLAB_SEED must be an integer, got {env!r}")
    return int(seed)


def _apply_config(ctx: click.Context, config_path) -> None:
    """Flat key=value file; fills parameters not given on the command line."""
    if not config_path:
        return
    overrides = {}
    with open(config_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise click.UsageError(f"{config_path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            overrides[k.strip().replace("-", "_")] = v.strip()
    for name, value in overrides.items():
        if name not in ctx.params:
            raise click.UsageError(f"{config_path}: unknown config key {name!r}")
        src = ctx.get_parameter_source(name)
        if src is not None and src.name == "COMMANDLINE":
            continue
        param = next(p for p in ctx.command.params if p.name == name)
        ctx.params[name] = param.type.convert(value, param, ctx)


def _write_manifest(out_dir: str, command: str, config: dict, inputs: dict, outputs: list, seed=None, extra=None):
    manifest = {
        "command": command,
        "tool_version": __version__,
        "timestamp_utc": datetime.now(timezone.utc).isoformat(),
        "seed": seed,
        "config": config,
        "inputs": {p: _sha256(p) for p in inputs.values() if p},
        "outputs": outputs,
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_corpus(utterances: str, films: str, trim: bool = True) -> Corpus:
    try:
        corpus = parse_corpus(utterances, films)
    except CorpusError as e:
        for issue in e.issues:
            click.echo(issue, err=True)
        sys.exit(1)
    return trim_credits(corpus) if trim else corpus


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else _fmt(v) for v in row])


@click.group()
@click.version_option(version=__version__, prog_name="screenlab")
def main():
    """Corpus analytics for emotion in film acting performances."""


_corpus_opts = [
    click.option("--utterances", "utterances", required=True, type=click.Path(exists=True, dir_okay=False)),
    click.option("--films", "films", required=True, type=click.Path(exists=True, dir_okay=False)),
    click.option("--out", "out", required=True, type=click.Path(file_okay=False)),
    click.option("--config", "config", default=None, type=click.Path(exists=True, dir_okay=False)),
]


def _with(opts):
    def deco(f):
        for opt in reversed(opts):
            f = opt(f)
        return f

    return deco


@main.command()
@_with(_corpus_opts)
@click.option("--trim-credits/--no-trim-credits", "trim", default=True, show_default=True)
@click.option("--group-conversations/--no-group-conversations", "group", default=True, show_default=True)
@click.option("--gap", default=3.0, show_default=True, help="conversation gap threshold, seconds")
@click.pass_context
def ingest(ctx, utterances, films, out, config, trim, group, gap):
    """Validate a corpus and emit its canonical serialized form."""
    _apply_config(ctx, config)
    trim, group, gap = ctx.params["trim"], ctx.params["group"], ctx.params["gap"]
    corpus = _load_corpus(utterances, films, trim=trim)
    if group:
        corpus = group_conversations(corpus, gap_s=gap)
    os.makedirs(out, exist_ok=True)
    upath, fpath = write_corpus(corpus, out)
    _write_manifest(
        out,
        "ingest",
        {"trim_credits": trim, "group_conversations": group, "gap": gap},
        {"utterances": utterances, "films": films},
        [os.path.basename(upath), os.path.basename(fpath)],
        extra={"n_films": len(corpus.films), "n_utterances": len(corpus.utterances)},
    )
    click.echo(f"ingested {len(corpus.utterances)} utterances across {len(corpus.films)} films")


@main.command()
@_with(_corpus_opts)
@click.option("--k", default=DEFAULT_KNN_K, show_default=True)
@click.option("--tau", default=DEFAULT_TAU, show_default=True)
@click.option("--resolution", default=DEFAULT_RESOLUTION, show_default=True)
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.option("--min-count", "min_count", default=50, show_default=True)
@click.option("--restarts", default=DEFAULT_RESTARTS, show_default=True)
@click.pass_context
def cluster(ctx, utterances, films, out, config, k, tau, resolution, seed, min_count, restarts):
    """Build the phrase similarity graph and emit Leiden phrase groups."""
    _apply_config(ctx, config)
    k, tau = ctx.params["k"], ctx.params["tau"]
    resolution, min_count, restarts = ctx.params["resolution"], ctx.params["min_count"], ctx.params["restarts"]
    seed = _resolve_seed(ctx, ctx.params["seed"])
    corpus = _load_corpus(utterances, films)

    sums: dict[str, np.ndarray] = {}
    counts: dict[str, int] = {}
    missing = []
    for u in corpus.utterances:
        if u.sent_embedding is None:
            missing.append(u.text)
            continue
        vec = np.asarray(u.sent_embedding, dtype=np.float64)
        if u.text in sums:
            sums[u.text] += vec
            counts[u.text] += 1
        else:
            sums[u.text] = vec.copy()
            counts[u.text] = 1
    texts = sorted({u.text for u in corpus.utterances})
    missing = sorted(set(missing) - set(sums))
    if missing:
        click.echo(f"texts lacking sent_embedding: {missing[:5]} (+{max(0, len(missing)-5)} more)", err=True)
        sys.exit(1)
    embeddings = {t: sums[t] / counts[t] for t in sums}

    graph = build_knn_graph(texts, embeddings, k=k, tau=tau)
    partition = leiden_partition(graph, resolution=resolution, seed=seed, restarts=restarts)
    groups = make_phrase_groups(corpus, partition, min_count=min_count)

    os.makedirs(out, exist_ok=True)
    gpath = os.path.join(out, "phrase_groups.jsonl")
    with open(gpath, "w", encoding="utf-8") as fh:
        for g in groups:
            fh.write(
                json.dumps(
                    {
                        "group_id": g.group_id,
                        "representative": g.representative,
                        "member_texts": sorted(g.member_texts),
                        "count": g.count,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    _write_manifest(
        out,
        "cluster",
        {"k": k, "tau": tau, "resolution": resolution, "min_count": min_count, "restarts": restarts},
        {"utterances": utterances, "films": films},
        ["phrase_groups.jsonl"],
        seed=seed,
        extra={
            "n_nodes": graph.n_nodes,
            "n_edges": graph.n_edges,
            "quality": partition.quality,
            "n_communities": partition.n_communities,
            "n_groups_kept": len(groups),
        },
    )
    click.echo(f"{len(groups)} phrase groups (of {partition.n_communities} communities) written")


def _load_groups(path: str) -> list[PhraseGroup]:
    groups = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            groups.append(
                PhraseGroup(
                    group_id=int(obj["group_id"]),
                    member_texts=frozenset(obj["member_texts"]),
                    utterance_ids=[],
                    representative=obj["representative"],
                    count=int(obj["count"]),
                )
            )
    return groups


def _range_rows(reports: list[tuple[str, object, object]]) -> list[list]:
    rows = []
    for subject_id, rep, ci in sorted(reports, key=lambda r: r[1].entropy):
        row = [subject_id, rep.n, rep.entropy, rep.params.converged]
        row.extend(rep.params.alpha.tolist())
        row.extend([ci.lo if ci else None, ci.hi if ci else None, rep.epsilon, ci.seed if ci else None])
        rows.append(row)
    return rows


_RANGE_HEADER = (
    ["subject_id", "n", "entropy", "converged"]
    + [f"alpha_{i}" for i in range(1, 8)]
    + ["ci_lo", "ci_hi", "epsilon", "seed"]
)


def _utterance_bootstrap_entropy(mat: np.ndarray, eps: float, point_report, n_boot: int, seed: int):
    sm = smooth_simplex(mat, eps)
    logs = np.log(sm)
    sqs = sm * sm
    alpha0 = point_report.params.alpha

    def statistic(idx: np.ndarray) -> float:
        params = _fit_from_suff(
            logs[idx].mean(axis=0),
            sm[idx].mean(axis=0),
            sqs[idx].mean(axis=0),
            idx.size,
            DEFAULT_TOL,
            DEFAULT_MAX_ITER,
            alpha_init=alpha0,  # warm start: refits stay cheap
        )
        return dirichlet_entropy(params.alpha)

    return bootstrap_ci_statistic(
        mat.shape[0], statistic, point_report.entropy, n_boot=n_boot, seed=seed
    )


@main.command("range")
@_with(_corpus_opts)
@click.option("--by", type=click.Choice(["phrase", "genre", "film"]), required=True)
@click.option("--groups", "groups_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--min-count", "min_count", default=50, show_default=True)
@click.option("--min-films", "min_films", default=DEFAULT_MIN_FILMS, show_default=True)
@click.option("--min-n", "min_n", default=DEFAULT_MIN_N, show_default=True)
@click.option("--epsilon", default=DEFAULT_EPSILON, show_default=True)
@click.option("--n-boot", "n_boot", default=DEFAULT_N_BOOT, show_default=True)
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.pass_context
def range_cmd(ctx, utterances, films, out, config, by, groups_path, min_count, min_films, min_n, epsilon, n_boot, seed):
    """Emotional range reports (Dirichlet entropy), sorted ascending."""
    _apply_config(ctx, config)
    by, groups_path = ctx.params["by"], ctx.params["groups_path"]
    min_count, min_films, min_n = ctx.params["min_count"], ctx.params["min_films"], ctx.params["min_n"]
    epsilon, n_boot = ctx.params["epsilon"], ctx.params["n_boot"]
    seed = _resolve_seed(ctx, ctx.params["seed"])
    corpus = _load_corpus(utterances, films)
    os.makedirs(out, exist_ok=True)
    skipped: dict = {}
    reports: list[tuple[str, object, object]] = []

    if by == "phrase":
        if not groups_path:
            raise click.UsageError("--by phrase requires --groups from `screenlab cluster`")
        groups = _load_groups(groups_path)
        text_to_group: dict[str, int] = {}
        for g in groups:
            for t in g.member_texts:
                text_to_group[t] = g.group_id
        mats: dict[int, list] = {}
        for u in corpus.utterances:
            gi = text_to_group.get(u.text)
            if gi is not None:
                mats.setdefault(gi, []).append(u.emotion.probs)
        rep_of = {g.group_id: g.representative for g in groups}
        for i, g in enumerate(sorted(mats)):
            mat = np.asarray(mats[g], dtype=np.float64)
            if mat.shape[0] < min_count:
                skipped[rep_of[g]] = int(mat.shape[0])
                continue
            rep = emotional_range(mat, subject_id=rep_of[g], min_n=min(min_count, min_n), eps=epsilon)
            ci = _utterance_bootstrap_entropy(mat, epsilon, rep, n_boot, seed + i)
            reports.append((rep_of[g], rep, ci))
    elif by == "genre":
        result = genre_emotional_range(
            corpus, min_films=min_films, min_n=min_n, eps=epsilon, n_boot=n_boot, seed=seed
        )
        skipped = result.skipped
        for genre, entry in sorted(result.entries.items()):
            reports.append((genre, entry.report, entry.ci))
    else:  # film
        for i, fid in enumerate(sorted(corpus.films)):
            mat = np.asarray(
                [u.emotion.probs for u in corpus.utterances if u.film_id == fid], dtype=np.float64
            )
            if mat.shape[0] < min_n:
                skipped[fid] = int(mat.shape[0])
                continue
            rep = emotional_range(mat, subject_id=fid, min_n=min_n, eps=epsilon)
            ci = _utterance_bootstrap_entropy(mat, epsilon, rep, n_boot, seed + i)
            reports.append((fid, rep, ci))

    csv_path = os.path.join(out, "range_report.csv")
    _write_csv(csv_path, _RANGE_HEADER, _range_rows(reports))
    _write_manifest(
        out,
        f"range --by {by}",
        {
            "by": by,
            "min_count": min_count,
            "min_films": min_films,
            "min_n": min_n,
            "epsilon": epsilon,
            "n_boot": n_boot,
            "groups": groups_path,
        },
        {"utterances": utterances, "films": films, "groups": groups_path or ""},
        ["range_report.csv"],
        seed=seed,
        extra={"skipped": skipped},
    )
    click.echo(f"{len(reports)} range rows written ({len(skipped)} subjects skipped)")


@main.command()
@_with(_corpus_opts)
@click.option(
    "--measure",
    default="emotionality",
    show_default=True,
    help="emotionality or emotion:<label> for one of the six non-neutral labels",
)
@click.option("--mode", type=click.Choice(["prob", "argmax"]), default="prob", show_default=True)
@click.option("--bins", default=narrative.DEFAULT_N_BINS, show_default=True)
@click.option("--n-boot", "n_boot", default=DEFAULT_N_BOOT, show_default=True)
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.pass_context
def trajectory(ctx, utterances, films, out, config, measure, mode, bins, n_boot, seed):
    """Narrative-time trajectory CSV (plus a gnuplot-ready .dat)."""
    _apply_config(ctx, config)
    measure, mode, bins, n_boot = (
        ctx.params["measure"],
        ctx.params["mode"],
        ctx.params["bins"],
        ctx.params["n_boot"],
    )
    seed = _resolve_seed(ctx, ctx.params["seed"])
    corpus = _load_corpus(utterances, films)
    if measure == "emotionality":
        report = narrative.emotionality_trajectory(
            corpus, mode=mode, n_bins=bins, n_boot=n_boot, seed=seed
        )
    elif measure.startswith("emotion:"):
        label = measure.split(":", 1)[1]
        if label not in EMOTION_LABELS or label == "neutral":
            raise click.UsageError(f"unknown emotion label {label!r}")
        report = narrative.emotion_proportion_trajectory(
            corpus, label, mode=mode, n_bins=bins, n_boot=n_boot, seed=seed
        )
    else:
        raise click.UsageError(f"unknown measure {measure!r}")

    os.makedirs(out, exist_ok=True)
    rows = []
    for p in report.series:
        rows.append(
            [
                p.bin_index,
                p.lo_pct,
                p.hi_pct,
                p.point,
                p.ci.lo if p.ci else None,
                p.ci.hi if p.ci else None,
                p.n_utts,
                report.measure,
                report.mode,
            ]
        )
    csv_path = os.path.join(out, "trajectory.csv")
    _write_csv(
        csv_path,
        ["bin_index", "bin_lo_pct", "bin_hi_pct", "point", "ci_lo", "ci_hi", "n_utts", "measure", "mode"],
        rows,
    )
    dat_path = os.path.join(out, "trajectory.dat")
    with open(dat_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# bin_mid_pct point ci_lo ci_hi n_utts\n")
        for p in report.series:
            mid = 0.5 * (p.lo_pct + p.hi_pct)
            vals = [mid, p.point, p.ci.lo if p.ci else None, p.ci.hi if p.ci else None, p.n_utts]
            fh.write(" ".join("NaN" if v is None else _fmt(v) for v in vals) + "\n")
    _write_manifest(
        out,
        "trajectory",
        {"measure": measure, "mode": mode, "bins": bins, "n_boot": n_boot},
        {"utterances": utterances, "films": films},
        ["trajectory.csv", "trajectory.dat"],
        seed=seed,
        extra={"n_excluded": report.n_excluded},
    )
    click.echo(f"trajectory over {bins} bins written ({report.n_excluded} utterances excluded)")


@main.command("diachronic")
@_with(_corpus_opts)
@click.option("--mode", type=click.Choice(["prob", "argmax"]), default="prob", show_default=True)
@click.option("--n-boot", "n_boot", default=DEFAULT_N_BOOT, show_default=True)
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.pass_context
def diachronic_cmd(ctx, utterances, films, out, config, mode, n_boot, seed):
    """Yearly emotionality series with film-cluster bootstrap CIs."""
    _apply_config(ctx, config)
    mode, n_boot = ctx.params["mode"], ctx.params["n_boot"]
    seed = _resolve_seed(ctx, ctx.params["seed"])
    corpus = _load_corpus(utterances, films)
    report = diachronic.yearly_emotionality(corpus, mode=mode, n_boot=n_boot, seed=seed)
    os.makedirs(out, exist_ok=True)
    rows = [
        [p.year, p.point, p.ci.lo, p.ci.hi, p.n_utts, report.mode] for p in report.points
    ]
    _write_csv(
        os.path.join(out, "diachronic.csv"),
        ["year", "point", "ci_lo", "ci_hi", "n_utts", "mode"],
        rows,
    )
    _write_manifest(
        out,
        "diachronic",
        {"mode": mode, "n_boot": n_boot},
        {"utterances": utterances, "films": films},
        ["diachronic.csv"],
        seed=seed,
        extra={"empty_years": report.empty_years},
    )
    click.echo(f"{len(report.points)} yearly rows written")


@main.command()
@_with(_corpus_opts)
@click.option("--groups", "groups_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["prob", "argmax"]), default="prob", show_default=True)
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.pass_context
def regress(ctx, utterances, films, out, config, groups_path, mode, seed):
    """Within-group fixed-effects regression of emotionality on year."""
    _apply_config(ctx, config)
    mode = ctx.params["mode"]
    seed = _resolve_seed(ctx, ctx.params["seed"])
    corpus = _load_corpus(utterances, films)
    groups = _load_groups(groups_path)
    selected = diachronic.select_ubiquitous_groups(corpus, groups)
    if not selected:
        click.echo("no phrase group spans every release year; nothing to regress", err=True)
        sys.exit(1)
    panel = diachronic.build_panel(corpus, selected, mode=mode)
    try:
        report = diachronic.fixed_effects_ols(panel)
    except (ValueError, diachronic.DegenerateDesignError) as e:
        click.echo(str(e), err=True)
        sys.exit(1)
    os.makedirs(out, exist_ok=True)
    payload = {
        "beta": report.beta,
        "se": report.se,
        "r2": report.r2,
        "f_stat": report.f_stat,
        "df1": report.df1,
        "df2": report.df2,
        "p_value": report.p_value,
        "n_obs": report.n_obs,
        "n_groups": report.n_groups,
        "provenance": {
            "mode": mode,
            "seed": seed,
            "groups_file": os.path.basename(groups_path),
            "n_groups_selected": len(selected),
            "selection": "groups with utterances in every release year",
        },
    }
    with open(os.path.join(out, "fe_regression.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(
        out,
        "regress",
        {"mode": mode, "groups": groups_path},
        {"utterances": utterances, "films": films, "groups": groups_path},
        ["fe_regression.json"],
        seed=seed,
    )
    click.echo(
        f"beta={report.beta:.6g} se={report.se:.3g} R2={report.r2:.4f} "
        f"F(1,{report.df2})={report.f_stat:.4g} p={report.p_value:.3g}"
    )


@main.command("eval")
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--config", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--n-boot", "n_boot", default=DEFAULT_N_BOOT, show_default=True)
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.pass_context
def eval_cmd(ctx, data, out, config, n_boot, seed):
    """Classification metrics from a JSONL of gold labels and predictions.

    Each line: {"gold": <label>, "pred": <label>} or {"gold": ..., "probs": [7 floats]}.
    """
    _apply_config(ctx, config)
    n_boot = ctx.params["n_boot"]
    seed = _resolve_seed(ctx, ctx.params["seed"])
    gold, pred = [], []
    with open(data, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                gold.append(obj["gold"])
                pred.append(obj["probs"] if "probs" in obj else obj["pred"])
            except (json.JSONDecodeError, KeyError) as e:
                click.echo(f"{data}:{lineno}: {e}", err=True)
                sys.exit(1)
    try:
        report = evalkit.classification_report(gold, pred, n_boot=n_boot, seed=seed)
    except ValueError as e:
        click.echo(str(e), err=True)
        sys.exit(1)
    os.makedirs(out, exist_ok=True)
    payload = {
        "accuracy": report.accuracy,
        "accuracy_ci": [report.accuracy_ci.lo, report.accuracy_ci.hi],
        "weighted_f1": report.weighted_f1,
        "f1_ci": [report.f1_ci.lo, report.f1_ci.hi],
        "per_class": {
            lbl: {"precision": s.precision, "recall": s.recall, "f1": s.f1, "support": s.support}
            for lbl, s in report.per_class.items()
        },
        "confusion": report.confusion.tolist(),
        "labels": list(EMOTION_LABELS),
    }
    with open(os.path.join(out, "eval_report.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(
        out, "eval", {"n_boot": n_boot}, {"data": data}, ["eval_report.json"], seed=seed
    )
    click.echo(f"accuracy={report.accuracy:.4f} weighted_f1={report.weighted_f1:.4f}")


@main.command("head-predict")
@_with(_corpus_opts)
@click.option("--weights", required=True, type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def head_predict(ctx, utterances, films, out, config, weights):
    """Run the emotion head over stored layer embeddings."""
    _apply_config(ctx, config)
    corpus = _load_corpus(utterances, films, trim=False)
    try:
        params = evalkit.load_head_weights(weights)
    except ValueError as e:
        click.echo(str(e), err=True)
        sys.exit(1)
    lacking = [f"{u.film_id}:{u.utt_id}" for u in corpus.utterances if u.layer_embeddings is None]
    if lacking:
        click.echo(f"utterances lacking layer embeddings: {lacking[:5]} (+{max(0, len(lacking)-5)} more)", err=True)
        sys.exit(1)
    os.makedirs(out, exist_ok=True)
    pred_path = os.path.join(out, "predictions.jsonl")
    with open(pred_path, "w", encoding="utf-8") as fh:
        for u in corpus.utterances:
            try:
                dist = evalkit.ser_head_forward(u.layer_embeddings, params)
            except ValueError as e:
                click.echo(f"{u.film_id}:{u.utt_id}: {e}", err=True)
                sys.exit(1)
            fh.write(
                json.dumps(
                    {"film_id": u.film_id, "utt_id": u.utt_id, "emotion_probs": list(dist.probs)},
                    ensure_ascii=False,
                )
                + "\n"
            )
    _write_manifest(
        out,
        "head-predict",
        {"weights": weights},
        {"utterances": utterances, "films": films, "weights": weights},
        ["predictions.jsonl"],
    )
    click.echo(f"{len(corpus.utterances)} predictions written")


@main.command("synthgen")
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option(
    "--preset",
    type=click.Choice(["flat", "trend", "anger-peak", "yearly-decline"]),
    default="flat",
    show_default=True,
)
@click.option("--films", "n_films", default=8, show_default=True)
@click.option("--utterances-per-film", "upf", default=60, show_default=True)
@click.option("--bins", default=narrative.DEFAULT_N_BINS, show_default=True)
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.pass_context
def synthgen_cmd(ctx, out, preset, n_films, upf, bins, seed):
    """Generate a synthetic corpus in the standard JSONL formats."""
    seed = _resolve_seed(ctx, seed)
    kwargs = dict(n_films=n_films, utterances_per_film=upf, n_bins=bins, seed=seed)
    if preset == "trend":
        kwargs["neutral_curve"] = np.linspace(0.9, 0.5, bins)
    elif preset == "anger-peak":
        kwargs["anger_peak_bin"] = int(round(0.85 * bins))  # 85% into the film
    elif preset == "yearly-decline":
        kwargs["yearly_emotionality"] = {1980 + i: 0.55 - 0.005 * i for i in range(43)}
    spec = synthgen.SynthSpec(**kwargs)
    corpus = synthgen.synth_corpus(spec)
    os.makedirs(out, exist_ok=True)
    upath, fpath = write_corpus(corpus, out)
    _write_manifest(
        out,
        "synthgen",
        {"preset": preset, "films": n_films, "utterances_per_film": upf, "bins": bins},
        {},
        [os.path.basename(upath), os.path.basename(fpath)],
        seed=seed,
    )
    click.echo(f"synthetic corpus: {len(corpus.films)} films, {len(corpus.utterances)} utterances")


if __name__ == "__main__":
    main()
