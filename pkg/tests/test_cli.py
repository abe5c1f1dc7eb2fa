import json
from pathlib import Path

from protolab.cli import main

FIXDIR = Path(__file__).resolve().parents[1] / "src" / "protolab" / "fixtures"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_check_valid_bspl(capsys):
    code, out, _ = run(capsys, "check", str(FIXDIR / "flexible_purchase.bspl"))
    assert code == 0
    assert "ok" in out


def test_check_empty_protocol_exits_one(capsys, tmp_path):
    path = tmp_path / "empty.bspl"
    path.write_text("protocol Empty { roles A, B parameters out ID key }")
    code, out, _ = run(capsys, "check", str(path))
    assert code == 1
    assert "NoMessages" in out


def test_check_parse_error_exits_two(capsys, tmp_path):
    path = tmp_path / "broken.trace"
    path.write_text("A -> : missing")
    code, _, err = run(capsys, "check", str(path))
    assert code == 2
    assert "parse error" in err


def test_realizability_purchase_trace_c(capsys):
    code, out, _ = run(capsys, "realizability", str(FIXDIR / "purchase.trace"), "--preset", "trace-c")
    assert code == 0
    assert out.startswith("Realizable")


def test_realizability_flexible_purchase_unrealizable(capsys):
    code, out, _ = run(capsys, "realizability", str(FIXDIR / "flexible_purchase.trace"), "--preset", "trace-c")
    assert code == 1
    assert "NonlocalChoice" in out


def test_realizability_json_schema(capsys):
    code, out, _ = run(
        capsys,
        "realizability",
        str(FIXDIR / "want_willpay.trace"),
        "--preset",
        "trace-f",
        "--delivery",
        "fifo",
        "--interpretation",
        "RR",
        "--format",
        "json",
    )
    assert code == 0
    record = json.loads(out)
    assert record["schema_version"] == "1"
    assert record["outcome"] == "Realizable"


def test_realizability_scribble_dispatch(capsys):
    code, out, _ = run(capsys, "realizability", str(FIXDIR / "indirect_payment.scr"))
    assert code == 0


def test_simulate_writes_log(capsys):
    code, out, _ = run(capsys, "simulate", str(FIXDIR / "want_willpay.bspl"), "--seed", "3")
    assert code == 0
    lines = [l for l in out.splitlines() if l]
    assert any(" E Want " in l for l in lines)
    kinds = {l.split()[2] for l in lines}
    assert kinds <= {"E", "R"}


def test_simulate_exhaustive_counts(capsys):
    code, out, _ = run(capsys, "simulate", str(FIXDIR / "want_willpay.bspl"), "--exhaustive")
    assert code == 0
    assert "maximal enactments" in out


def test_commitments_command(capsys, tmp_path):
    log = tmp_path / "run.log"
    log.write_text(
        "\n".join(
            [
                "0 Buyer E Request ID=1,item=fig",
                "0 Seller R Request ID=1,item=fig",
                "0 Seller E Offer ID=1,item=fig,price=$5",
                "0 Buyer R Offer ID=1,item=fig,price=$5",
                "0 Buyer E Accept ID=1,item=fig,price=$5,decision=deal,address=x",
                "0 Seller R Accept ID=1,item=fig,price=$5,decision=deal,address=x",
                "2 Seller E Deliver ID=1,item=fig,address=x,dropOff=porch",
                "2 Buyer R Deliver ID=1,item=fig,address=x,dropOff=porch",
                "4 Buyer E Payment ID=1,price=$5,dropOff=porch,OK=paid",
                "4 Seller R Payment ID=1,price=$5,dropOff=porch,OK=paid",
            ]
        )
    )
    code, out, _ = run(
        capsys,
        "commitments",
        "--protocol",
        str(FIXDIR / "purchase.bspl"),
        "--cupid",
        str(FIXDIR / "deliver_payment.cupid"),
        "--log",
        str(log),
        "--now",
        "5",
    )
    assert code == 0
    assert "Discharged" in out


def test_matrix_text(capsys):
    code, out, _ = run(capsys, "matrix")
    assert code == 0
    assert "matches golden table: yes" in out


def test_matrix_json_matches_golden_and_is_deterministic(capsys):
    code, first, _ = run(capsys, "matrix", "--format", "json")
    assert code == 0
    code, second, _ = run(capsys, "matrix", "--format", "json")
    assert code == 0
    a, b = json.loads(first), json.loads(second)
    assert a["matches_golden"] is True
    a.pop("generated_at")
    b.pop("generated_at")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_usage_error_exits_two(capsys):
    assert main(["realizability"]) == 2 or main(["realizability"]) == 2


def test_project_command(capsys):
    code, out, _ = run(capsys, "project", str(FIXDIR / "purchase.trace"), "Buyer", "--doctrine", "trace-c")
    assert code == 0
    assert "Seller!Request" in out


def test_project_fsm_output(capsys):
    code, out, _ = run(capsys, "project", str(FIXDIR / "book_journey.scr"), "C", "--fsm")
    assert code == 0
    assert "edge 0 -> 1 A!query(String)" in out
