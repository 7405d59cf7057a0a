"""Command-line entry point wiring the analysis pipeline together.

Subcommands: ingest, build-models, top-unigrams, distances, anonymity,
bound, eval, synth, framework.  Exit codes: 0 success, 1 runtime error,
2 usage error.  Every subcommand that writes files also writes a
manifest.json describing its inputs and outputs.  Options may come from a
line-oriented key=value file via --config; explicit flags win.  Worker
count resolves flag > LINKRISK_WORKERS > number of cores.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import anonymity, corpus, evaluation, framework, lm

WORKERS_ENV = "LINKRISK_WORKERS"


def _resolve_workers(args) -> int:
    if getattr(args, "workers", None) is not None:
        return max(1, args.workers)
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _write_manifest(outdir: str, command: str, inputs: dict, params: dict, outputs: dict) -> None:
    manifest = {"command": command, "inputs": inputs, "params": params, "outputs": outputs}
    with open(os.path.join(outdir, "manifest.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _load_config(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config(args: argparse.Namespace, sub: argparse.ArgumentParser) -> None:
    if not getattr(args, "config", None):
        return
    values = _load_config(args.config)
    types = {a.dest: a.type for a in sub._actions}
    for dest, raw in values.items():
        if not hasattr(args, dest):
            continue
        if getattr(args, dest) != sub.get_default(dest):
            continue  # explicit flag wins
        caster = types.get(dest)
        setattr(args, dest, caster(raw) if caster else raw)


def _normalization_config(args) -> tuple[corpus.NormalizationConfig, dict]:
    stopwords = (
        corpus.load_wordlist(args.stopwords) if args.stopwords else corpus.default_stopwords()
    )
    smilies = corpus.load_wordlist(args.smilies) if args.smilies else corpus.default_smilies()
    cfg = corpus.NormalizationConfig(stopwords=stopwords, smilies=smilies)
    hashes = {
        "stopwords_sha256": corpus.wordlist_hash(stopwords),
        "smilies_sha256": corpus.wordlist_hash(smilies),
    }
    return cfg, hashes


def _cmd_ingest(args) -> int:
    cfg, hashes = _normalization_config(args)
    with open(args.input, "r", encoding="utf-8") as fh:
        result = corpus.ingest_jsonl(fh, lenient=args.lenient)
    profiles = corpus.aggregate_profiles(result.comments, cfg)
    kept = corpus.filter_interesting(
        profiles,
        min_comments=args.min_comments,
        min_profiles=args.min_profiles,
        exclude_communities=args.exclude_community or (),
    )
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "profiles.jsonl")
    corpus.write_profiles(kept, out_path)
    _write_manifest(
        args.out,
        "ingest",
        inputs={"input": args.input, **hashes},
        params={
            "min_comments": args.min_comments,
            "min_profiles": args.min_profiles,
            "exclude_community": sorted(args.exclude_community or []),
            "lenient": args.lenient,
        },
        outputs={
            "profiles": out_path,
            "comments_read": len(result.comments),
            "lines_skipped": len(result.errors),
            "profiles_total": len(profiles),
            "profiles_kept": len(kept),
        },
    )
    print(f"kept {len(kept)} of {len(profiles)} profiles -> {out_path}")
    if result.errors:
        print(f"skipped {len(result.errors)} malformed line(s)", file=sys.stderr)
    return 0


def _cmd_build_models(args) -> int:
    streams = corpus.load_profiles(args.profiles)
    profiles, communities, global_model = lm.build_models(streams)
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "models.jsonl")
    lm.save_models(out_path, profiles, communities, global_model)
    _write_manifest(
        args.out,
        "build-models",
        inputs={"profiles": args.profiles},
        params={},
        outputs={
            "models": out_path,
            "profile_models": len(profiles),
            "community_models": len(communities),
        },
    )
    print(f"built {len(profiles)} profile and {len(communities)} community models -> {out_path}")
    return 0


def _cmd_top_unigrams(args) -> int:
    profiles, communities, global_model = lm.load_models(args.models)
    if args.kind == "global":
        model = global_model
    elif args.kind == "community":
        if args.key not in communities:
            raise ValueError(f"unknown community {args.key!r}")
        model = communities[args.key]
    else:
        key = (args.author, args.key)
        if key not in profiles:
            raise ValueError(f"unknown profile {key!r}")
        model = profiles[key]
    for token, count in lm.top_k(model, args.k):
        print(f"{token}\t{count}")
    return 0


def _community_models(models_path: str, community: str):
    profiles, _, _ = lm.load_models(models_path)
    selected = {
        author: model for (author, comm), model in profiles.items() if comm == community
    }
    if not selected:
        raise ValueError(f"no profiles found for community {community!r}")
    return selected


def _cmd_distances(args) -> int:
    selected = _community_models(args.models, args.community)
    matrix = anonymity.DistanceMatrix.build(selected, workers=_resolve_workers(args))
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, f"{args.community}.dmat")
    matrix.save(out_path)
    _write_manifest(
        args.out,
        "distances",
        inputs={"models": args.models},
        params={"community": args.community},
        outputs={"matrix": out_path, "profiles": len(matrix.keys)},
    )
    print(f"{len(matrix.keys)} profiles -> {out_path}")
    return 0


def _cmd_anonymity(args) -> int:
    if args.matrix:
        matrix = anonymity.DistanceMatrix.load(args.matrix)
    else:
        if not args.models or not args.community:
            raise ValueError("need either --matrix or both --models and --community")
        matrix = anonymity.DistanceMatrix.build(
            _community_models(args.models, args.community), workers=_resolve_workers(args)
        )
    result = anonymity.convergent_subset(matrix, args.subject, args.d)
    report = {
        "subject": result.subject,
        "d": result.d,
        "k": result.k,
        "members": list(result.members),
    }
    if args.k is not None:
        report["kd_anonymous"] = result.k >= args.k
        report["requested_k"] = args.k
    print(json.dumps(report, sort_keys=True))
    return 0


def _cmd_bound(args) -> int:
    bound = anonymity.matching_bound(args.c, args.d, args.k)
    print(f"t = {bound.t:.6f}")
    return 0


def _cmd_synth(args) -> int:
    corp = evaluation.synth_corpus(
        n_users=args.users,
        topics=args.topics,
        comments_per_user=args.comments,
        rng_seed=args.seed,
        idiosyncrasy=args.idiosyncrasy,
    )
    os.makedirs(args.out, exist_ok=True)
    name_a, name_b = corp.communities
    paths = {}
    for name, comments in ((name_a, corp.comments_a), (name_b, corp.comments_b)):
        path = os.path.join(args.out, f"{name}.jsonl")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(evaluation.comments_to_jsonl(comments))
        paths[name] = path
    links_path = os.path.join(args.out, "links.csv")
    with open(links_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("source,target,same_user\n")
        for link in corp.links:
            fh.write(f"{link.source},{link.target},{int(link.same_user)}\n")
    _write_manifest(
        args.out,
        "synth",
        inputs={},
        params={
            "users": args.users,
            "topics": args.topics,
            "comments": args.comments,
            "seed": args.seed,
            "idiosyncrasy": args.idiosyncrasy,
        },
        outputs={**paths, "links": links_path},
    )
    print(f"wrote {len(corp.comments_a) + len(corp.comments_b)} comments for {args.users} users")
    return 0


def _cmd_eval(args) -> int:
    streams = corpus.load_profiles(args.profiles)
    profile_models, _, _ = lm.build_models(streams)
    models_a = {a: m for (a, c), m in profile_models.items() if c == args.community_a}
    models_b = {a: m for (a, c), m in profile_models.items() if c == args.community_b}
    if not models_a:
        raise ValueError(f"no profiles for community {args.community_a!r}")
    if not models_b:
        raise ValueError(f"no profiles for community {args.community_b!r}")
    ks = [int(part) for part in args.k.split(",") if part.strip()]
    result = evaluation.run_experiment(
        models_a,
        models_b,
        ks=ks,
        workers=_resolve_workers(args),
        community_a=args.community_a,
        community_b=args.community_b,
    )
    metadata = {
        "profiles": args.profiles,
        "community_a": args.community_a,
        "community_b": args.community_b,
        "k": ks,
    }
    written = evaluation.write_experiment_csvs(result, args.out, metadata)
    _write_manifest(
        args.out,
        "eval",
        inputs={"profiles": args.profiles},
        params={"community_a": args.community_a, "community_b": args.community_b, "k": ks},
        outputs={os.path.basename(p): p for p in written},
    )
    for k in sorted(result.precisions):
        print(f"precision@{k} = {result.precisions[k]:.4f}")
    print(f"fraction below diagonal = {result.scatter.fraction_below:.4f}")
    return 0


def _cmd_framework(args) -> int:
    if args.framework_command == "impossibility":
        report = framework.impossibility_demo()
        for line in report["transcript"]:
            print(line)
        print(f"SD = {report['sd']}")
        return 0
    report = framework.run_scenario(args.scenario)
    print(json.dumps(report, sort_keys=True, indent=2))
    return 0


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="linkrisk",
        description="Linkability and identity-disclosure risk analytics for pseudonymous text profiles.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workers", type=int, default=None, help="worker threads (default: all cores)")
    common.add_argument("--config", default=None, help="key=value option file; flags win")

    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    subs = {}

    p = sub.add_parser("ingest", parents=[common], help="normalize a comment corpus into profile token streams")
    p.add_argument("--input", required=True, help="JSON Lines comment file")
    p.add_argument("--stopwords", default=None, help="stopword list file (default: packaged list)")
    p.add_argument("--smilies", default=None, help="smiley list file (default: packaged list)")
    p.add_argument("--min-comments", type=int, default=100)
    p.add_argument("--min-profiles", type=int, default=100)
    p.add_argument("--exclude-community", action="append", default=None, metavar="NAME")
    p.add_argument("--lenient", action="store_true", help="skip malformed lines instead of failing")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)
    subs["ingest"] = p

    p = sub.add_parser("build-models", parents=[common], help="aggregate token streams into unigram models")
    p.add_argument("--profiles", required=True, help="profiles.jsonl from ingest")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_build_models)
    subs["build-models"] = p

    p = sub.add_parser("top-unigrams", parents=[common], help="most frequent tokens of a model")
    p.add_argument("--models", required=True)
    p.add_argument("--key", default=None, help="community name (or profile community with --author)")
    p.add_argument("--author", default=None, help="author id for kind=profile")
    p.add_argument("--kind", choices=("community", "global", "profile"), default="community")
    p.add_argument("-k", type=int, default=20)
    p.set_defaults(func=_cmd_top_unigrams)
    subs["top-unigrams"] = p

    p = sub.add_parser("distances", parents=[common], help="pairwise distance matrix of one community")
    p.add_argument("--models", required=True)
    p.add_argument("--community", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_distances)
    subs["distances"] = p

    p = sub.add_parser("anonymity", parents=[common], help="neighborhood of a profile at radius d")
    p.add_argument("--models", default=None)
    p.add_argument("--community", default=None)
    p.add_argument("--matrix", default=None, help="previously saved .dmat file")
    p.add_argument("--subject", required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--k", type=int, default=None, help="also report whether the subset reaches size k")
    p.set_defaults(func=_cmd_anonymity)
    subs["anonymity"] = p

    p = sub.add_parser("bound", parents=[common], help="adversary matching-likelihood bound")
    p.add_argument("--c", type=float, required=True, help="matching distance (> 0)")
    p.add_argument("--d", type=float, required=True, help="convergence radius")
    p.add_argument("--k", type=int, required=True, help="anonymous subset size")
    p.set_defaults(func=_cmd_bound)
    subs["bound"] = p

    p = sub.add_parser("eval", parents=[common], help="cross-community linkability experiment")
    p.add_argument("--profiles", required=True)
    p.add_argument("--community-a", required=True)
    p.add_argument("--community-b", required=True)
    p.add_argument("--k", default="1,5,10,20", help="comma-separated k values")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval)
    subs["eval"] = p

    p = sub.add_parser("synth", parents=[common], help="generate a paired synthetic corpus")
    p.add_argument("--users", type=int, required=True)
    p.add_argument("--topics", type=int, required=True)
    p.add_argument("--comments", type=int, default=60, help="comments per user (upper bound)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--idiosyncrasy", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)
    subs["synth"] = p

    p = sub.add_parser("framework", parents=[common], help="attribute-level privacy scenarios")
    fsub = p.add_subparsers(dest="framework_command", metavar="ACTION")
    frun = fsub.add_parser("run", parents=[common], help="evaluate a scenario file")
    frun.add_argument("scenario", help="scenario JSON file")
    frun.set_defaults(func=_cmd_framework, framework_command="run")
    fimp = fsub.add_parser("impossibility", parents=[common], help="maximal posterior-shift construction")
    fimp.set_defaults(func=_cmd_framework, framework_command="impossibility")
    p.set_defaults(func=_cmd_framework, framework_command=None)
    subs["framework"] = p

    return parser, subs


def dispatch(argv) -> int:
    parser, subs = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 2
    if args.command == "framework" and not args.framework_command:
        subs["framework"].print_usage(sys.stderr)
        return 2
    try:
        _apply_config(args, subs[args.command])
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
