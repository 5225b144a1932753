#!/usr/bin/env python3
"""
Tests for the hurwitz-approx command line.
"""

import csv
import json
import tempfile
from pathlib import Path
from unittest.mock import patch

import pytest

from hurwitz_approx.approx import reduce
from hurwitz_approx.cli import (
    EXIT_BUDGET,
    EXIT_OK,
    EXIT_USAGE,
    SweepRow,
    UsageError,
    canonical_kind,
    decide_row,
    exp_parameter,
    main,
    parse_phi,
    parse_range,
    run_sweep,
)
from hurwitz_approx.config import _reset_for_testing


class TestArgumentHelpers:

    def test_parse_phi(self):
        assert parse_phi("1/2/3") == (1, 2, 3)
        assert parse_phi("-1/0/23") == (-1, 0, 23)
        with pytest.raises(UsageError):
            parse_phi("1/2")
        with pytest.raises(UsageError):
            parse_phi("a/b/c")

    def test_parse_range(self):
        assert parse_range("2:5") == range(2, 6)
        assert parse_range("7") == range(7, 8)
        assert len(parse_range("5:4")) == 0
        with pytest.raises(UsageError):
            parse_range("x:y")

    def test_kinds(self):
        assert canonical_kind('golden') == 'all_ones'
        assert canonical_kind('exp2over') == 'exp_2_over'
        with pytest.raises(UsageError):
            canonical_kind('pi')

    def test_exp_parameter(self):
        assert exp_parameter('e', None) == 1
        assert exp_parameter('exp_inv', '7') == 7
        assert exp_parameter('exp2over', '4') == 2
        with pytest.raises(UsageError):
            exp_parameter('exp2over', '3')
        with pytest.raises(UsageError):
            exp_parameter('tanh', '3')


class TestSweepRow:

    def setup_method(self):
        _reset_for_testing()

    def teardown_method(self):
        _reset_for_testing()

    def test_validation(self):
        with pytest.raises(ValueError):
            SweepRow('exp_inv', '2', 2, 0, 1, 'maybe')
        with pytest.raises(ValueError):
            SweepRow('exp_inv', '2', 2, 0, 1, 'value')
        with pytest.raises(ValueError):
            SweepRow('exp_inv', '2', 2, 0, 1, 'zero', n2L='1/2')

    def test_json_line(self):
        row = SweepRow('exp_inv', '12', 23, 0, 1, 'zero', witness=[36, 5], multiplications=11)
        assert row.witness == (36, 5)
        assert SweepRow.from_json(row.to_json()) == row

    def test_key_orders_parameters_numerically(self):
        rows = [SweepRow('exp_inv', p, 3, 0, 1, 'unknown') for p in ('10', '9', '2')]
        assert [r.param for r in sorted(rows, key=lambda r: r.key)] == ['2', '9', '10']

    def test_decide_row(self):
        row = decide_row('exp_inv', '3', reduce(0, 1, 2))
        assert (row.tag, row.n2L) == ('value', '1/2')
        assert row.oracle is None

    def test_zero_witness_is_leaper_index(self):
        target = reduce(0, 1, 23)
        fast = decide_row('exp_inv', '12', target, fast=True)
        slow = decide_row('exp_inv', '12', target)
        assert fast.tag == slow.tag == 'zero'
        assert fast.witness == slow.witness

    def test_exp_inv_one_is_e_in_sweeps(self):
        row = decide_row('exp_inv', '1', reduce(0, 1, 2), s_one_is_e=True)
        assert (row.tag, row.n2L) == ('value', '1/2')
        assert decide_row('exp_inv', '1', reduce(0, 1, 49), fast=True, s_one_is_e=True).tag == 'zero'
        with pytest.raises(ValueError):
            decide_row('exp_inv', '1', reduce(0, 1, 2))


class TestCommands:

    def setup_method(self):
        _reset_for_testing()

    def teardown_method(self):
        _reset_for_testing()

    def test_expand(self, capsys):
        assert main(['expand', 'e', '--count', '6']) == EXIT_OK
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "2 1 2 1 1 4"
        assert out[1] == "P_0 = 2/1"

    def test_expand_alias(self, capsys):
        assert main(['expand', 'exp2over', '3', '--count', '5']) == EXIT_OK
        assert capsys.readouterr().out.splitlines()[0] == "1 1 18 7 1"

    def test_expand_json(self, capsys):
        assert main(['--json', 'expand', 'pattern', '1;;2j,1,1', '--count', '4']) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload['quotients'] == [1, 2, 1, 1]
        assert payload['convergents'][0] == [1, 1]

    def test_bad_parameter(self, capsys):
        assert main(['expand', 'exp_inv', '1']) == EXIT_USAGE
        assert "error:" in capsys.readouterr().err

    def test_argparse_error(self):
        assert main(['decide', 'e']) == EXIT_USAGE

    def test_convergent(self, capsys):
        assert main(['--json', 'convergent', 'e', '--index', '4']) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert (payload['p'], payload['q']) == (19, 7)
        assert len(payload['mu']) == 2

    def test_leaper_period(self, capsys):
        assert main(['--json', 'leaper-period', '1', '5']) == EXIT_OK
        assert json.loads(capsys.readouterr().out)['period_len'] == 10

    def test_budget_exit_code(self, capsys):
        assert main(['--budget', '0', 'mod-period', 'e', '-n', '7']) == EXIT_BUDGET
        assert "budget exceeded" in capsys.readouterr().err

    def test_decide_budget_exit_code(self, capsys):
        assert main(['--budget', '0', 'decide', 'e', '--phi', '0/1/7']) == EXIT_BUDGET
        captured = capsys.readouterr()
        assert "budget exceeded" in captured.err
        assert "unknown" not in captured.out

    def test_decide_fast(self, capsys):
        assert main(['--json', 'decide', 'exp_inv', '12', '--phi', '0/1/23', '--fast']) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload['tag'] == 'zero'
        assert payload['multiplications'] < 12
        assert len(payload['witness']) == 2

    def test_decide_value(self, capsys):
        assert main(['decide', 'exp_inv', '3', '--phi', '0/1/2']) == EXIT_OK
        assert capsys.readouterr().out.strip() == "value 1/2"

    def test_decide_rejects_trivial_target(self, capsys):
        assert main(['decide', 'exp_inv', '3', '--phi', '0/2/2']) == EXIT_USAGE
        assert "error:" in capsys.readouterr().err

    def test_value(self, capsys):
        assert main(['--json', 'value', 'exp_inv', '3', '--phi', '0/1/2']) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload['tag'] == 'value'
        assert payload['n2L'] == '1/2'
        assert payload['target'] == [0, 1, 2]

    def test_verify_table(self, capsys):
        assert main(['verify', 'table']) == EXIT_OK
        assert "table: pass" in capsys.readouterr().out

    def test_oracle_csv(self, capsys):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / 'windows.csv'
            assert main(['oracle', 'exp_inv', '3', '--phi', '0/1/2', '--qmax', '64', '--csv', str(path)]) == EXIT_OK
            payload = json.loads(capsys.readouterr().out)
            assert len(payload['windows']) == 7
            assert payload['consistency'] in ('consistent', 'inconsistent')
            with open(path, newline='') as f:
                rows = list(csv.DictReader(f))
            assert [int(row['window_exponent']) for row in rows] == list(range(7))

    def test_oracle_rejects_small_qmax(self):
        assert main(['oracle', 'e', '--phi', '0/1/2', '--qmax', '8']) == EXIT_USAGE


class TestSweep:

    def setup_method(self):
        _reset_for_testing()

    def teardown_method(self):
        _reset_for_testing()

    def test_sweep_and_resume(self, capsys):
        with tempfile.TemporaryDirectory() as tmpdir:
            out = Path(tmpdir) / 'sweep.jsonl'
            args = ['sweep', 'exp_inv', '--params', '2:3', '--n-range', '2:4', '--workers', '1', '--out', str(out)]
            assert main(args) == EXIT_OK
            assert "6 rows" in capsys.readouterr().out

            rows = [SweepRow.from_json(line) for line in out.read_text().splitlines()]
            assert [(r.param, r.n) for r in rows] == [('2', 2), ('2', 3), ('2', 4), ('3', 2), ('3', 3), ('3', 4)]
            assert (rows[0].tag, rows[0].n2L) == ('value', '1/2')
            before = out.read_text()

            with patch('hurwitz_approx.cli.decide_row', side_effect=AssertionError("recomputed")):
                assert main(args) == EXIT_OK
            assert out.read_text() == before

    def test_sweep_extends_cached_rows(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            out = Path(tmpdir) / 'sweep.jsonl'
            base = ['sweep', 'exp_inv', '--params', '2', '--workers', '1', '--out', str(out)]
            assert main(base + ['--n-range', '2:3']) == EXIT_OK
            assert main(base + ['--n-range', '2:5', '--odd']) == EXIT_OK
            keys = [(r.n, r.r, r.m) for r in map(SweepRow.from_json, out.read_text().splitlines())]
            assert keys == [(2, 0, 1), (3, 0, 1), (5, 0, 1)]

    def test_empty_range(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            out = Path(tmpdir) / 'empty.jsonl'
            assert main(['sweep', 'e', '--n-range', '5:4', '--out', str(out)]) == EXIT_OK
            assert out.exists()
            assert out.read_text() == ""

    def test_fast_and_default_rows_agree(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            params = [str(s) for s in range(1, 6)]
            moduli = range(3, 20)
            fast = run_sweep('exp_inv', params, moduli, Path(tmpdir) / 'fast.jsonl', all_targets=True, fast=True)
            slow = run_sweep('exp_inv', params, moduli, Path(tmpdir) / 'slow.jsonl', all_targets=True)
            assert len(fast) == len(slow)
            for a, b in zip(fast, slow):
                assert a.key == b.key
                assert (a.tag, a.n2L, a.witness) == (b.tag, b.n2L, b.witness), a.key

    def test_invalid_parameter_recorded_per_row(self, capsys):
        with tempfile.TemporaryDirectory() as tmpdir:
            out = Path(tmpdir) / 'sweep.jsonl'
            args = ['sweep', 'exp_inv', '--params', '0:2', '--n-range', '49', '--fast', '--out', str(out)]
            assert main(args) == EXIT_OK
            rows = {r.param: r for r in map(SweepRow.from_json, out.read_text().splitlines())}
            assert rows['0'].tag == 'unknown'
            assert rows['0'].note.startswith('invalid:')
            assert rows['1'].tag == 'zero'
            assert rows['2'].tag in ('zero', 'value', 'bound')

    def test_budget_exhaustion_recorded_per_row(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            out = Path(tmpdir) / 'sweep.jsonl'
            assert main(['--budget', '0', 'sweep', 'e', '--n-range', '7', '--out', str(out)]) == EXIT_OK
            row = SweepRow.from_json(out.read_text().strip())
            assert row.tag == 'unknown'
            assert "budget" in row.note
