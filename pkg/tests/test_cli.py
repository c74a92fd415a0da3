"""CLI surface: exit-code contract, manifests, and the run/replay/report flow."""

import filecmp
import json
import os

import pytest

from conftest import chat_reply
from puzzlebench.cli import (
    EXIT_FAIL,
    EXIT_PASS,
    EXIT_UNPARSEABLE,
    EXIT_USAGE,
    generate_instances,
    main,
)
from puzzlebench.config import load_config
from puzzlebench.envs import get_environment


def write_config(path, **overrides):
    config = {
        "out_dir": str(path.parent / "out"),
        "seed": 0,
        "instances_per_cell": 2,
        "environments": {"hanoi": {"levels": [1, 2]}},
        "models": [],
        "parallelism": 2,
        "replay_mode": "live",
        "replay_path": str(path.parent / "replay.jsonl"),
        "theta": 0.8,
    }
    config.update(overrides)
    path.write_text(json.dumps(config))
    return config


class TestGenerate:
    def test_writes_instances_and_sorted_manifest(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        write_config(cfg)
        assert main(["generate", "--config", str(cfg)]) == EXIT_PASS
        out = tmp_path / "out"
        manifest = json.loads((out / "manifest.json").read_text())
        ids = [row["instance_id"] for row in manifest["instances"]]
        assert len(ids) == 4  # 2 levels x 2 seeds
        assert ids == sorted(ids)
        for row in manifest["instances"]:
            assert (out / row["path"]).exists()

    def test_stable_across_reruns(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        write_config(cfg)
        main(["generate", "--config", str(cfg)])
        first = (tmp_path / "out" / "manifest.json").read_bytes()
        main(["generate", "--config", str(cfg)])
        assert (tmp_path / "out" / "manifest.json").read_bytes() == first

    def test_infeasible_river_ladder_refused(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        write_config(
            cfg,
            environments={"river": {"ladder": [[1, {"pairs": 4, "capacity": 2}]]}},
        )
        assert main(["generate", "--config", str(cfg)]) == EXIT_USAGE

    def test_config_errors_exit_2(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        write_config(cfg, instances_per_cell=0)
        assert main(["generate", "--config", str(cfg)]) == EXIT_USAGE
        assert main(["generate", "--config", str(tmp_path / "missing.json")]) == EXIT_USAGE

    def test_per_env_decoding_override_rejected(self, tmp_path):
        # max_tokens is per-model only; per-env budgets would break the
        # constant-budget invariant
        cfg = tmp_path / "cfg.json"
        write_config(cfg, environments={"hanoi": {"max_tokens": 100}})
        assert main(["generate", "--config", str(cfg)]) == EXIT_USAGE


class TestValidateAndSolve:
    @pytest.fixture()
    def instance_file(self, tmp_path):
        env = get_environment("hanoi")
        instance = env.generate(1, 0)
        path = tmp_path / "instance.json"
        path.write_text(instance.to_json())
        return env, instance, path

    def test_oracle_solution_exits_zero(self, instance_file, tmp_path):
        env, instance, inst_path = instance_file
        sol = tmp_path / "solution.txt"
        assert main(["solve", "hanoi", str(inst_path), "-o", str(sol)]) == EXIT_PASS
        assert main(["validate", "hanoi", str(inst_path), str(sol)]) == EXIT_PASS

    def test_corrupted_solution_exits_one(self, instance_file, tmp_path, capsys):
        env, instance, inst_path = instance_file
        moves = env.oracle(instance)
        sol = tmp_path / "solution.txt"
        sol.write_text(env.render_candidate(moves[1:]))
        assert main(["validate", "hanoi", str(inst_path), str(sol)]) == EXIT_FAIL
        verdict = json.loads(capsys.readouterr().out)
        assert verdict["kind"] == "Fail"
        assert verdict["violations"]

    def test_empty_solution_exits_three(self, instance_file, tmp_path):
        env, instance, inst_path = instance_file
        sol = tmp_path / "solution.txt"
        sol.write_text("")
        assert main(["validate", "hanoi", str(inst_path), str(sol)]) == EXIT_UNPARSEABLE

    def test_missing_file_exits_two(self, instance_file, tmp_path):
        env, instance, inst_path = instance_file
        assert main(["validate", "hanoi", str(inst_path), str(tmp_path / "nope.txt")]) == EXIT_USAGE

    def test_solve_respects_oracle_bounds(self, tmp_path):
        env = get_environment("checker")
        instance = env.generate(6, 0)  # n=12, beyond the BFS oracle
        path = tmp_path / "instance.json"
        path.write_text(instance.to_json())
        assert main(["solve", "checker", str(path)]) == EXIT_USAGE


class TestRunReplayReport:
    def _scripted(self, config_dict, stub, mix=("pass", "fail", "collapse")):
        """Answer each instance's prompt by cycling pass/fail/collapse."""
        cfg = load_config_from_dict(config_dict)
        script = {}
        for i, instance in enumerate(generate_instances(cfg)):
            env = get_environment(instance.env_id)
            _, user = env.render_prompt(instance)
            kind = mix[i % len(mix)]
            if kind == "pass":
                text = env.render_candidate(env.oracle(instance))
            elif kind == "fail":
                text = env.render_candidate(env.oracle(instance)[:-1])
            else:
                text = "I cannot solve this."
            script[user] = text

        def responder(body):
            return 200, chat_reply(script[body["messages"][1]["content"]])

        stub.responder = responder

    def test_run_then_replay_byte_identical_reports(self, tmp_path, stub_endpoint):
        cfg_path = tmp_path / "cfg.json"
        config = write_config(
            cfg_path,
            environments={"hanoi": {"levels": [1, 2]}, "waterjug": {"levels": [1]}},
            instances_per_cell=3,
            models=[{
                "model_id": "stub",
                "endpoint_url": stub_endpoint.url,
                "max_tokens": 4096,
                "temperature": 0.0,
            }],
            replay_mode="record",
        )
        self._scripted(config, stub_endpoint)
        assert main(["run", "--config", str(cfg_path)]) == EXIT_PASS
        assert main(["report", "--config", str(cfg_path)]) == EXIT_PASS
        out1 = tmp_path / "out"

        out2 = tmp_path / "out2"
        assert main(["replay", "--config", str(cfg_path), "--out", str(out2)]) == EXIT_PASS
        assert main(["report", "--config", str(cfg_path), "--out", str(out2)]) == EXIT_PASS

        assert filecmp.cmp(out1 / "records.jsonl", out2 / "records.jsonl", shallow=False)
        report1, report2 = out1 / "report", out2 / "report"
        assert sorted(os.listdir(report1)) == sorted(os.listdir(report2))
        for name in os.listdir(report1):
            assert filecmp.cmp(report1 / name, report2 / name, shallow=False), name

    def test_parallelism_is_bounded(self, tmp_path, stub_endpoint):
        cfg_path = tmp_path / "cfg.json"
        config = write_config(
            cfg_path,
            environments={"hanoi": {"levels": [1]}},
            instances_per_cell=8,
            models=[{
                "model_id": "stub",
                "endpoint_url": stub_endpoint.url,
                "max_tokens": 1024,
            }],
            parallelism=3,
        )
        stub_endpoint.hold_s = 0.02
        self._scripted(config, stub_endpoint, mix=("collapse",))
        assert main(["run", "--config", str(cfg_path)]) == EXIT_PASS
        assert stub_endpoint.max_in_flight <= 3
        assert stub_endpoint.request_count == 8

    def test_report_over_empty_records(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        write_config(cfg_path)
        assert main(["report", "--config", str(cfg_path)]) == EXIT_PASS
        bundle = json.loads((tmp_path / "out" / "report" / "report.json").read_text())
        assert bundle["tables"]["task_difficulty"] == []

    def test_errored_episodes_reported_separately(self, tmp_path, stub_endpoint):
        cfg_path = tmp_path / "cfg.json"
        write_config(
            cfg_path,
            environments={"hanoi": {"levels": [1]}},
            instances_per_cell=2,
            models=[{
                "model_id": "stub",
                "endpoint_url": stub_endpoint.url,
                "max_tokens": 1024,
            }],
        )
        stub_endpoint.responder = lambda body: (400, {"error": "nope"})
        assert main(["run", "--config", str(cfg_path)]) == EXIT_PASS
        out = tmp_path / "out"
        assert (out / "errors.jsonl").read_text().count("\n") == 2
        assert (out / "records.jsonl").read_text() == ""


def load_config_from_dict(config_dict):
    """Round-trip a dict through the loader (tests reuse the dict they wrote)."""
    import tempfile

    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(config_dict, fh)
        path = fh.name
    try:
        return load_config(path)
    finally:
        os.unlink(path)
