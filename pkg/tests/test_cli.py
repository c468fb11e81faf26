import os

import pytest

import eval_cli


def _paths(fixtures_dir):
    return {
        'judgments': os.path.join(fixtures_dir, 'judgments.tsv'),
        'sysA': os.path.join(fixtures_dir, 'run_sysA.txt'),
        'sysB': os.path.join(fixtures_dir, 'run_sysB.txt'),
        'sysC': os.path.join(fixtures_dir, 'run_sysC.txt'),
        'dcm': os.path.join(fixtures_dir, 'dcm_params.json'),
        'dbn': os.path.join(fixtures_dir, 'dbn_params.json'),
        'raters': os.path.join(fixtures_dir, 'rater_labels.tsv'),
    }


def _rows(text):
    return [line.split('\t') for line in text.splitlines()]


@pytest.fixture
def single_result(tmp_path):
    judgments = tmp_path / 'j.tsv'
    judgments.write_text('q1\td1\t4\t4\t4\n', encoding='utf-8')
    run = tmp_path / 'run.txt'
    run.write_text('q1 Q0 d1 1 1.0 sys\n', encoding='utf-8')
    return str(judgments), str(run)


class TestEvaluate:

    def test_dcg_single_result(self, single_result, capsys):
        judgments, run = single_result
        assert eval_cli.main(['evaluate', '--metric', 'dcg', '--judgments', judgments, '--run', run]) == 0
        assert capsys.readouterr().out == 'all\tsys\tdcg\t15.000000\n'

    def test_missing_params_is_usage_error(self, single_result):
        judgments, run = single_result
        assert eval_cli.main(['evaluate', '--metric', 'udcm', '--judgments', judgments, '--run', run]) == 1

    def test_params_model_must_match(self, single_result, fixtures_dir):
        judgments, run = single_result
        argv = ['evaluate', '--metric', 'udbn', '--params', _paths(fixtures_dir)['dcm'],
                '--judgments', judgments, '--run', run]
        assert eval_cli.main(argv) == 1

    def test_bad_flag(self, single_result):
        judgments, run = single_result
        assert eval_cli.main(['evaluate', '--metric', 'ndcg', '--judgments', judgments, '--run', run]) == 1
        assert eval_cli.main(['evaluate', '--metric', 'dcg', '--judgments', judgments, '--run', run,
                              '--depth', 'ten']) == 1
        assert eval_cli.main([]) == 1

    def test_missing_file(self, tmp_path, single_result):
        _, run = single_result
        argv = ['evaluate', '--metric', 'dcg', '--judgments', str(tmp_path / 'nope.tsv'), '--run', run]
        assert eval_cli.main(argv) == 2

    def test_malformed_file(self, tmp_path, single_result):
        _, run = single_result
        bad = tmp_path / 'bad.tsv'
        bad.write_text('q1\td1\t7\t0\t0\n', encoding='utf-8')
        argv = ['evaluate', '--metric', 'dcg', '--judgments', str(bad), '--run', run]
        assert eval_cli.main(argv) == 2

    def test_undecodable_file(self, tmp_path, fixtures_dir, capsys):
        bad = tmp_path / 'bad.tsv'
        bad.write_bytes(b'q1\td\xff1\t4\t0\t0\n')
        argv = ['evaluate', '--metric', 'dcg', '--judgments', str(bad), '--run', _paths(fixtures_dir)['sysA']]
        assert eval_cli.main(argv) == 2
        assert capsys.readouterr().out == ''

    def test_undecodable_params(self, tmp_path, single_result):
        judgments, run = single_result
        bad = tmp_path / 'p.json'
        bad.write_bytes(b'{"model": "dcm\xff"}\n')
        argv = ['evaluate', '--metric', 'udcm', '--params', str(bad), '--judgments', judgments, '--run', run]
        assert eval_cli.main(argv) == 2

    def test_strict_missing_labels(self, fixtures_dir):
        paths = _paths(fixtures_dir)
        argv = ['evaluate', '--metric', 'dcg', '--judgments', paths['judgments'], '--run', paths['sysA'],
                '--missing', 'strict']
        assert eval_cli.main(argv) == 2

    def test_per_query(self, fixtures_dir, capsys):
        paths = _paths(fixtures_dir)
        argv = ['evaluate', '--metric', 'udcm', '--params', paths['dcm'], '--judgments', paths['judgments'],
                '--run', paths['sysA'], '--per-query', '--gain', 'linear']
        assert eval_cli.main(argv) == 0
        rows = _rows(capsys.readouterr().out)
        assert [r[3] for r in rows[:-1]] == ['q1', 'q2', 'q3', 'q4', 'q5', 'q6']
        assert rows[-1][:3] == ['all', 'sysA', 'udcm']

    def test_help(self, capsys):
        assert eval_cli.main(['--help']) == 0
        assert 'evaluate' in capsys.readouterr().out


class TestCompare:

    def test_ranks_runs(self, fixtures_dir, capsys):
        paths = _paths(fixtures_dir)
        argv = ['compare', '--metric', 'dcg', '--judgments', paths['judgments'],
                '--runs', paths['sysA'], paths['sysB'], paths['sysC']]
        assert eval_cli.main(argv) == 0
        rows = _rows(capsys.readouterr().out)
        systems = [r for r in rows if r[0] == 'system']
        taus = [r for r in rows if r[0] == 'tau']
        # sysA orders every query by topical grade
        assert systems[0][2] == 'sysA'
        assert sorted(r[2] for r in systems) == ['sysA', 'sysB', 'sysC']
        assert [(r[1], r[2]) for r in taus] == [('sysA', 'sysB'), ('sysA', 'sysC'), ('sysB', 'sysC')]

    def test_same_run_twice(self, fixtures_dir):
        paths = _paths(fixtures_dir)
        argv = ['compare', '--metric', 'dcg', '--judgments', paths['judgments'], '--runs', paths['sysA'], paths['sysA']]
        assert eval_cli.main(argv) == 1


class TestSimulate:

    def test_model_mismatch(self, fixtures_dir, tmp_path):
        paths = _paths(fixtures_dir)
        argv = ['simulate', '--model', 'dbn', '--params', paths['dcm'], '--judgments', paths['judgments'],
                '--run', paths['sysA'], '--sessions', '5', '--out', str(tmp_path / 'c.jsonl')]
        assert eval_cli.main(argv) == 1

    def test_writes_click_log(self, fixtures_dir, tmp_path, capsys):
        paths = _paths(fixtures_dir)
        out = tmp_path / 'c.jsonl'
        argv = ['simulate', '--model', 'dcm', '--params', paths['dcm'], '--judgments', paths['judgments'],
                '--run', paths['sysA'], '--sessions', '5', '--seed', '3', '--out', str(out)]
        assert eval_cli.main(argv) == 0
        assert capsys.readouterr().out == 'simulate\tdcm\t6\t30\t3\n'
        assert len(out.read_text(encoding='utf-8').splitlines()) == 30


class TestAgreement:

    def test_fixture(self, fixtures_dir, capsys):
        argv = ['agreement', '--labels', _paths(fixtures_dir)['raters'], '--aspect', 'topical']
        assert eval_cli.main(argv) == 0
        rows = _rows(capsys.readouterr().out)
        grades = [r for r in rows if r[0] == 'grade']
        assert grades[0] == ['grade', 'q1', 'd1', 'topical', '4']
        assert len(grades) == 6
        assert ['agreement', 'items', '6'] in rows


def _pipeline(fixtures_dir, workdir, capsys):
    """simulate -> fit -> evaluate -> compare -> correlate; returns the concatenated stdout"""
    paths = _paths(fixtures_dir)
    clicks = os.path.join(workdir, 'clicks.jsonl')
    fitted = os.path.join(workdir, 'fitted.json')
    steps = [
        ['simulate', '--model', 'dbn', '--params', paths['dbn'], '--judgments', paths['judgments'],
         '--run', paths['sysA'], '--sessions', '200', '--seed', '11', '--out', clicks],
        ['fit', '--model', 'dbn', '--clicks', clicks, '--judgments', paths['judgments'], '--out', fitted,
         '--seed', '5'],
        ['evaluate', '--metric', 'udbn', '--params', fitted, '--judgments', paths['judgments'],
         '--run', paths['sysA'], '--per-query'],
        ['compare', '--metric', 'udbn-s', '--params', fitted, '--judgments', paths['judgments'],
         '--runs', paths['sysA'], paths['sysB'], paths['sysC']],
        ['correlate', '--metric', 'udbn', '--params', fitted, '--judgments', paths['judgments'],
         '--run', paths['sysA'], '--clicks', clicks],
        ['correlate', '--metric', 'dcg', '--judgments', paths['judgments'],
         '--run', paths['sysA'], '--clicks', clicks, '--method', 'kendall'],
    ]
    out = []
    for argv in steps:
        assert eval_cli.main(argv) == 0, argv[0]
        out.append(capsys.readouterr().out)
    return ''.join(out)


class TestPipeline:

    def test_end_to_end_is_deterministic(self, fixtures_dir, tmp_path, capsys):
        first_dir = tmp_path / 'first'
        second_dir = tmp_path / 'second'
        first_dir.mkdir()
        second_dir.mkdir()
        first = _pipeline(fixtures_dir, str(first_dir), capsys)
        second = _pipeline(fixtures_dir, str(second_dir), capsys)
        assert first == second
        assert (first_dir / 'fitted.json').read_bytes() == (second_dir / 'fitted.json').read_bytes()
        kinds = {row[0] for row in _rows(first)}
        assert kinds == {'simulate', 'fit', 'param', 'query', 'all', 'system', 'tau', 'correlation'}

    def test_dcm_fit_then_evaluate(self, fixtures_dir, tmp_path, capsys):
        paths = _paths(fixtures_dir)
        clicks = str(tmp_path / 'clicks.jsonl')
        fitted = str(tmp_path / 'fitted.json')
        assert eval_cli.main(['simulate', '--model', 'dcm', '--params', paths['dcm'], '--judgments',
                              paths['judgments'], '--run', paths['sysC'], '--sessions', '100', '--out', clicks]) == 0
        assert eval_cli.main(['fit', '--model', 'dcm', '--clicks', clicks, '--judgments', paths['judgments'],
                              '--out', fitted]) == 0
        assert eval_cli.main(['evaluate', '--metric', 'udcm', '--params', fitted, '--judgments',
                              paths['judgments'], '--run', paths['sysB']]) == 0
        rows = _rows(capsys.readouterr().out)
        assert rows[-1][:3] == ['all', 'sysB', 'udcm']
        assert 0.0 < float(rows[-1][3]) < 1.0

    def test_log_file(self, single_result, tmp_path):
        judgments, run = single_result
        log = tmp_path / 'eval.log'
        assert eval_cli.main(['--log-file', str(log), '--debug', 'evaluate', '--metric', 'dcg',
                              '--judgments', judgments, '--run', run]) == 0
        assert 'Loaded 1 judgments' in log.read_text(encoding='utf-8')
