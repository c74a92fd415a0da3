"""Operator surface: generate instances, validate or solve single puzzles,
run/replay model evaluations, and emit metric reports.

Exit codes are a stable contract: 0 pass/success, 1 Fail verdict, 2
usage/config error, 3 unparseable solution input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import metrics
from .client import EpisodeError, ModelClient, ModelRequest, ReplayStore, evaluate_text, run_episode
from .config import ConfigError, load_config
from .core import OracleUnsupported, PuzzleInstance, VerdictKind
from .envs import get_environment

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_UNPARSEABLE = 3


def _instances_dir(out_dir):
    return os.path.join(out_dir, "instances")


def _instance_filename(instance):
    return f"{instance.env_id}__L{instance.level}__s{instance.seed}__{instance.instance_id[:12]}.json"


def env_for(config, env_id):
    """Environment object honoring the config's parse and validator settings."""
    settings = config.env_settings.get(env_id)
    if not settings:
        return get_environment(env_id, config.strict_parse)
    env = type(get_environment(env_id))(**settings)
    env.strict_parse = config.strict_parse
    return env


def generate_instances(config):
    """All instances for the config's ladders, deterministic per seed index."""
    instances = []
    for env_id in sorted(config.ladders):
        env = env_for(config, env_id)
        for level, template in config.ladders[env_id]:
            for idx in range(config.instances_per_cell):
                seed = config.seed + idx
                instances.append(env.generate(level, seed, template))
    return instances


def cmd_generate(config):
    inst_dir = _instances_dir(config.out_dir)
    os.makedirs(inst_dir, exist_ok=True)
    instances = generate_instances(config)
    manifest = []
    for instance in instances:
        path = os.path.join(inst_dir, _instance_filename(instance))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(instance.to_json() + "\n")
        manifest.append(
            {
                "instance_id": instance.instance_id,
                "env": instance.env_id,
                "level": instance.level,
                "seed": instance.seed,
                "path": os.path.relpath(path, config.out_dir),
            }
        )
    manifest.sort(key=lambda row: row["instance_id"])
    with open(os.path.join(config.out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump({"instances": manifest}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"generated {len(instances)} instances under {inst_dir}")
    return EXIT_PASS


def _load_manifest_instances(out_dir):
    manifest_path = os.path.join(out_dir, "manifest.json")
    if not os.path.exists(manifest_path):
        raise ConfigError(f"no manifest at {manifest_path}; run generate first")
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    paths = [os.path.join(out_dir, row["path"]) for row in manifest["instances"]]
    return metrics.load_instances(paths)


def _verdict_exit_code(verdict):
    if verdict.kind is VerdictKind.PASS:
        return EXIT_PASS
    if verdict.kind is VerdictKind.FAIL:
        return EXIT_FAIL
    return EXIT_UNPARSEABLE


def cmd_validate(env_id, instance_file, solution_file):
    for path in (instance_file, solution_file):
        if not os.path.exists(path):
            print(f"error: file not found: {path}", file=sys.stderr)
            return EXIT_USAGE
    env = get_environment(env_id)
    with open(instance_file, "r", encoding="utf-8") as fh:
        instance = PuzzleInstance.from_json(fh.read())
    if instance.env_id != env_id:
        print(f"error: instance file is for env {instance.env_id!r}", file=sys.stderr)
        return EXIT_USAGE
    with open(solution_file, "r", encoding="utf-8") as fh:
        text = fh.read()
    verdict = evaluate_text(env, instance, text, "stop")
    print(json.dumps(verdict.to_dict(), sort_keys=True))
    return _verdict_exit_code(verdict)


def cmd_solve(env_id, instance_file, out_path=None):
    if not os.path.exists(instance_file):
        print(f"error: file not found: {instance_file}", file=sys.stderr)
        return EXIT_USAGE
    env = get_environment(env_id)
    with open(instance_file, "r", encoding="utf-8") as fh:
        instance = PuzzleInstance.from_json(fh.read())
    try:
        candidate = env.oracle(instance)
    except OracleUnsupported as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = env.render_candidate(candidate)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_PASS


def run_episodes(config, mode=None):
    """Execute model x instance episodes with bounded parallelism. Returns
    (records, errors); records are sorted for reproducible output."""
    mode = mode or config.replay_mode
    if not config.models:
        raise ConfigError("config defines no models")
    store = None
    if mode in ("record", "replay"):
        store = ReplayStore(config.replay_path)
    client = ModelClient(mode=mode, store=store)
    instances = generate_instances(config)
    jobs = []
    for model in config.models:
        request = ModelRequest(
            endpoint_url=model.endpoint_url,
            model_id=model.model_id,
            system_text="",
            user_text="",
            max_tokens=model.max_tokens,
            temperature=model.temperature,
            timeout_s=model.timeout_s,
            api_key_env=model.api_key_env,
            extra_body=model.extra_body,
        )
        for instance in instances:
            jobs.append((instance, request))

    records, errors = [], []

    def one(job):
        instance, request = job
        env = get_environment(instance.env_id, config.strict_parse)
        try:
            return run_episode(env, instance, request, client), None
        except EpisodeError as exc:
            return None, {
                "model_id": request.model_id,
                "instance_id": instance.instance_id,
                "error": str(exc),
            }

    with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
        for record, error in pool.map(one, jobs):
            if record is not None:
                records.append(record)
            else:
                errors.append(error)
    records.sort(key=lambda r: (r.model_id, r.instance_id))
    errors.sort(key=lambda e: (e["model_id"], e["instance_id"]))
    return instances, records, errors, client.telemetry


def _write_records(config, instances, records, errors, telemetry):
    os.makedirs(config.out_dir, exist_ok=True)
    with open(os.path.join(config.out_dir, "records.jsonl"), "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
    if errors:
        with open(os.path.join(config.out_dir, "errors.jsonl"), "w", encoding="utf-8") as fh:
            for error in errors:
                fh.write(json.dumps(error, sort_keys=True) + "\n")
    with open(os.path.join(config.out_dir, "telemetry.json"), "w", encoding="utf-8") as fh:
        json.dump(telemetry, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(
        f"wrote {len(records)} records and {len(errors)} errored episodes to {config.out_dir}"
    )


def cmd_run(config, mode=None):
    cmd_generate(config)
    instances, records, errors, telemetry = run_episodes(config, mode=mode)
    _write_records(config, instances, records, errors, telemetry)
    return EXIT_PASS


def cmd_report(config):
    records_path = os.path.join(config.out_dir, "records.jsonl")
    records = metrics.load_records(records_path) if os.path.exists(records_path) else []
    instances = _load_manifest_instances(config.out_dir) if records else generate_instances(config)
    curves, diagnostics = metrics.aggregate(records, instances)
    metrics.write_report(
        os.path.join(config.out_dir, "report"), curves, diagnostics, theta=config.theta
    )
    print(f"report written to {os.path.join(config.out_dir, 'report')}")
    return EXIT_PASS


def build_parser():
    parser = argparse.ArgumentParser(
        prog="puzzlebench",
        description="Complexity-controlled puzzle benchmark: generation, validation, "
        "model evaluation, and collapse analytics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", required=True, help="path to the run config JSON")
        p.add_argument("--out", help="override the config's output directory")
        p.add_argument("--seed", type=int, help="override the config's base seed")

    p = sub.add_parser("generate", help="write deterministic instance files and a manifest")
    add_config(p)
    p = sub.add_parser("validate", help="validate a solution file against an instance file")
    p.add_argument("env")
    p.add_argument("instance_file")
    p.add_argument("solution_file")
    p = sub.add_parser("solve", help="write the oracle solution for an instance")
    p.add_argument("env")
    p.add_argument("instance_file")
    p.add_argument("-o", "--out", dest="solution_out")
    p = sub.add_parser("run", help="run episodes against configured endpoints")
    add_config(p)
    p = sub.add_parser("replay", help="re-derive records from the replay store, offline")
    add_config(p)
    p = sub.add_parser("report", help="aggregate records into the metrics bundle")
    add_config(p)
    return parser


def _config_from_args(args):
    config = load_config(args.config)
    if args.out or args.seed is not None:
        updates = {}
        if args.out:
            updates["out_dir"] = args.out
        if args.seed is not None:
            updates["seed"] = args.seed
        config = type(config)(**{**config.__dict__, **updates})
    return config


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            return cmd_generate(_config_from_args(args))
        if args.command == "validate":
            return cmd_validate(args.env, args.instance_file, args.solution_file)
        if args.command == "solve":
            return cmd_solve(args.env, args.instance_file, args.solution_out)
        if args.command == "run":
            return cmd_run(_config_from_args(args))
        if args.command == "replay":
            return cmd_run(_config_from_args(args), mode="replay")
        if args.command == "report":
            return cmd_report(_config_from_args(args))
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
