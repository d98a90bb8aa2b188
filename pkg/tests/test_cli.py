import json
from pathlib import Path

import pytest

from time4lab import cli
from time4lab.experiments import ScenarioError, parse_scenario
from time4lab.ofwire import codec as c

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestProve:
    def test_golden_transcript(self, capsys):
        code, out, _ = run(capsys, "prove", "--theorem", "1")
        assert code == cli.EXIT_OK
        assert out == (GOLDEN / "prove_theorem1.txt").read_text()

    @pytest.mark.parametrize("argv", [
        ["prove", "--theorem", "3", "--alpha", "0.6"],
        ["prove", "--theorem", "4", "--nu", "1/2"],
        ["prove", "--theorem", "5", "--n", "2"],
        ["prove", "--theorem", "7"],
        ["prove"],
        ["bogus"],
    ])
    def test_usage_errors(self, capsys, argv):
        assert run(capsys, *argv)[0] == cli.EXIT_USAGE

    def test_guard_exceeded(self, capsys):
        code, _, err = run(capsys, "prove", "--theorem", "2", "--m", "8")
        assert code == cli.EXIT_GUARD and "guard" in err

    def test_theorem_three_reports_impact(self, capsys):
        code, out, _ = run(capsys, "prove", "--theorem", "3", "--alpha", "1/4")
        assert code == cli.EXIT_OK
        assert "impact 1/4" in out
        assert out.rstrip().endswith("verdict: 2-swap forced")


class TestCodec:
    @pytest.mark.parametrize("path", sorted(GOLDEN.glob("*.hex")), ids=lambda p: p.stem)
    def test_golden_vectors_round_trip(self, capsys, path):
        header, hexdata = path.read_text().splitlines()[:2]
        kind = header.lstrip("# ").strip()
        code, out, _ = run(capsys, "codec", "decode", kind, hexdata)
        assert code == cli.EXIT_OK
        assert out.strip() == hexdata
        assert c.decode(bytes.fromhex(hexdata), kind).encode().hex() == hexdata

    def test_encode_from_fields(self, capsys):
        fields = json.dumps({"seconds": 1, "nanoseconds": 1})
        code, out, _ = run(capsys, "codec", "encode", "OfpTime", fields)
        assert code == 0 and out.strip() == "00000000000000010000000100000000"

    def test_encode_commit_with_explain(self, capsys):
        fields = json.dumps({"bundle_id": 7, "ctrl_type": c.OFPBCT_COMMIT_REQUEST, "flags": c.OFPBF_TIME,
                             "time_property": {"scheduled_time": {"seconds": 5}}, "xid": 9})
        code, out, _ = run(capsys, "codec", "encode", "BundleControlMsg", fields, "--explain")
        lines = out.splitlines()
        assert code == 0
        assert lines[0] == (GOLDEN / "timed_commit.hex").read_text().splitlines()[1]
        assert lines[1].startswith("BundleControlMsg (40 octets)")

    def test_truncated_decode_fails_with_offset(self, capsys):
        code, _, err = run(capsys, "codec", "decode", "TimeBundleProperty", "0001001800000000000000")
        assert code == 1
        assert "offset" in err

    def test_bad_hex_and_unknown_type(self, capsys):
        assert run(capsys, "codec", "decode", "OfpTime", "zz")[0] == 1
        assert run(capsys, "codec", "decode", "Nope", "00")[0] == cli.EXIT_USAGE
        assert run(capsys, "codec", "encode", "OfpTime", "{not json")[0] == cli.EXIT_USAGE


class TestParsing:
    def test_durations(self):
        assert cli.parse_duration_ns("0.4ms") == 400_000
        assert cli.parse_duration_ns("2") == 2_000_000
        assert cli.parse_duration_ns("-3us") == -3_000
        assert cli.parse_duration_ns("1s") == 10**9
        with pytest.raises(Exception):
            cli.parse_duration_ns("fast")

    def test_fractions(self):
        from fractions import Fraction as F
        assert cli.parse_fraction("0.025") == F(1, 40)
        assert cli.parse_fraction("2/5") == F(2, 5)


SCENARIO = {
    "version": 1,
    "id": "tiny",
    "topology": {"n": 2},
    "params": {"type": "I", "sched_error_ms": 0.5},
    "strategy": {"kind": "Time4"},
    "seeds": 3,
}


class TestScenario:
    def test_unknown_key_names_its_location(self):
        doc = dict(SCENARIO, params={"delta": 1})
        with pytest.raises(ScenarioError) as info:
            parse_scenario(json.dumps(doc))
        assert info.value.where == "params"

    def test_bad_version(self):
        with pytest.raises(ScenarioError):
            parse_scenario(json.dumps(dict(SCENARIO, version=2)))

    def test_bad_strategy_in_sweep(self):
        with pytest.raises(ScenarioError) as info:
            parse_scenario(json.dumps(dict(SCENARIO, sweep={"strategy": ["Time4", "Zeus"]})))
        assert info.value.where == "sweep.strategy[1]"

    def test_empty_sweep_is_one_point(self):
        scenario = parse_scenario(json.dumps(dict(SCENARIO, sweep={"n": []})))
        assert len(scenario.specs([0])) == 1

    def test_sweep_expands_grid(self):
        scenario = parse_scenario(json.dumps(dict(SCENARIO, sweep={"n": [2, 4], "delta_ms": [1, 2, 3]})))
        assert len(scenario.specs([0, 1])) == 12

    def test_custom_topology(self):
        doc = dict(SCENARIO, flows=[
            {"id": 1, "bandwidth_mbps": 5, "first_hop": "o1", "via": "t1"},
            {"id": 2, "bandwidth_mbps": 5, "first_hop": "o2", "via": "t2"},
        ], target=[{"flow": 1, "switch": "o1", "next": "t2"}, {"flow": 2, "switch": "o2", "next": "t1"}])
        scenario = parse_scenario(json.dumps(doc))
        assert scenario.intent.switches == ("o1", "o2")

    def test_simulate_scenario_file(self, capsys, tmp_path):
        path = tmp_path / "s.json"
        path.write_text(json.dumps(SCENARIO))
        code, out, _ = run(capsys, "simulate", str(path))
        lines = out.splitlines()
        assert code == 0 and len(lines) == 4
        assert lines[0].startswith("scenario_id,strategy,n,delta_ms")
        assert lines[1].startswith("tiny,Time4,2,9.64,1.3,0.5,0,")

    def test_missing_file_is_usage_error(self, capsys, tmp_path):
        assert run(capsys, "simulate", str(tmp_path / "none.json"))[0] == cli.EXIT_USAGE


class TestSimulate:
    def test_seed_env_fallback(self, capsys, monkeypatch):
        monkeypatch.setenv(cli.SEED_ENV, "41")
        _, out, _ = run(capsys, "simulate", "--strategy", "Untimed", "--seeds", "2")
        seeds = [line.split(",")[6] for line in out.splitlines()[1:]]
        assert seeds == ["41", "42"]

    def test_flag_beats_env(self, capsys, monkeypatch):
        monkeypatch.setenv(cli.SEED_ENV, "41")
        _, out, _ = run(capsys, "simulate", "--seed", "5")
        assert out.splitlines()[1].split(",")[6] == "5"

    def test_bad_env_seed(self, capsys, monkeypatch):
        monkeypatch.setenv(cli.SEED_ENV, "x")
        assert run(capsys, "simulate")[0] == cli.EXIT_USAGE

    def test_bad_param(self, capsys):
        assert run(capsys, "simulate", "--strategy", "Swan", "--param", "2")[0] == cli.EXIT_USAGE

    def test_jobs_do_not_change_bytes(self, capsys, tmp_path):
        one, two = tmp_path / "one.csv", tmp_path / "two.csv"
        assert run(capsys, "simulate", "--figure", "6d", "--seeds", "4", "--jobs", "1", "--out", str(one))[0] == 0
        assert run(capsys, "simulate", "--figure", "6d", "--seeds", "4", "--jobs", "2", "--out", str(two))[0] == 0
        assert one.read_bytes() == two.read_bytes()
        header = one.read_text().splitlines()[0]
        assert header == "strategy,param,n,seed,lost_packets,update_duration,withheld_bandwidth_seconds"

    def test_video(self, capsys):
        code, out, _ = run(capsys, "video", "--inject", "0.4ms", "--sched-error", "0", "--seeds", "2")
        rows = [line.split(",") for line in out.splitlines()[1:]]
        assert code == 0 and len(rows) == 2
        assert all(r[4] == "0.4" and r[5] == "0.8" for r in rows)
