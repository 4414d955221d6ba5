import pytest

from acceptance import CHECKS, export_results, print_summary, results_table, run_checks


@pytest.mark.parametrize('name', sorted(CHECKS))
def test_check_passes(name):
    passed, detail = CHECKS[name]()
    assert passed, detail


def test_failing_check_does_not_stop_the_suite(monkeypatch):
    def broken():
        raise ValueError('boom')

    monkeypatch.setitem(CHECKS, 'broken', broken)
    results = run_checks(['broken', 'duality'])
    assert [r['passed'] for r in results] == [False, True]
    assert results[0]['detail'] == 'ValueError: boom'


def test_summary_and_export(tmp_path, capsys):
    results = [{'check': 'a', 'passed': True, 'detail': 'ok'}, {'check': 'b', 'passed': False, 'detail': 'no'}]
    table = results_table(results)
    assert list(table['status']) == ['✅', '❌']
    print_summary(results)
    out = capsys.readouterr().out
    assert 'Passed: 1/2' in out
    assert '❌ Failed: b' in out
    path = tmp_path / 'results.csv'
    export_results(results, path)
    assert path.read_text().splitlines()[0] == 'check,status,passed,detail'
