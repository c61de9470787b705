"""Tests for the command-line entry point."""
import json

import pytest

from src.errors import CheckFailure, ConfigError
from src.main import (
    EXIT_CONFIG, EXIT_OK, Runner, build_parser, config_from_args, first_failure, main,
)
from src.models import CheckResult, RunConfig
from src.storage import ActionCache


def runner_for(action, census, **kwargs) -> Runner:
    """A Runner that reuses the session contexts instead of enumerating again."""
    runner = Runner(RunConfig(p=7, **kwargs).validate())
    runner._action = action
    runner._census = census
    return runner


class TestParser:
    """Tests for argument parsing."""

    def test_q_form(self):
        """Test --q splits into p and m."""
        args = build_parser().parse_args(['census', '--q', '9'])
        config = config_from_args(args)
        assert (config.p, config.m) == (3, 2)

    def test_p_m_form(self):
        """Test --p with --m."""
        args = build_parser().parse_args(['bounds', '--p', '3', '--m', '2', '--max-reps', '4'])
        config = config_from_args(args)
        assert config.q == 9
        assert config.max_reps == 4

    def test_q_and_p_exclusive(self):
        """Test --q and --p cannot both be given."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(['census', '--q', '7', '--p', '7'])

    def test_invalid_config(self):
        """Test an even q fails validation."""
        args = build_parser().parse_args(['census', '--q', '8'])
        with pytest.raises(ConfigError):
            config_from_args(args)


class TestExitCodes:
    """Tests for the exit status of main()."""

    @pytest.fixture
    def log_file(self, tmp_path):
        return tmp_path / 'run.log'

    @pytest.mark.parametrize("argv", [
        ['census', '--q', '8'],
        ['census', '--q', '15'],
        ['census', '--q', '17'],
        ['census', '--q', '5'],
        ['construct', '--q', '7', '--gram', 'identity'],
    ])
    def test_configuration_errors(self, argv, log_file):
        """Test invalid configurations exit with 2."""
        assert main(argv + ['--log-file', str(log_file), '--quiet']) == EXIT_CONFIG

    def test_argparse_errors(self):
        """Test a missing size option exits with 2."""
        assert main(['census']) == EXIT_CONFIG
        assert main(['plot', '--q', '7']) == EXIT_CONFIG

    def test_help(self, capsys):
        """Test --help exits with 0."""
        assert main(['--help']) == EXIT_OK
        assert 'baersaxl' in capsys.readouterr().out

    def test_cache_of_other_model(self, tmp_path, log_file, action7):
        """Test a cache of another Gram model exits with 2."""
        path = tmp_path / 'q7.cache'
        ActionCache(path).save(action7)
        argv = ['bounds', '--q', '7', '--gram', 'identity', '--cache', str(path),
                '--log-file', str(log_file), '--quiet']
        assert main(argv) == EXIT_CONFIG

    def test_bounds_run_writes_report(self, tmp_path, log_file):
        """Test a bounds run at q = 7 passes and writes both report files."""
        out = tmp_path / 'report.json'
        argv = ['bounds', '--q', '7', '--max-reps', '2', '--out', str(out),
                '--log-file', str(log_file), '--quiet']
        assert main(argv) == EXIT_OK
        data = json.loads(out.read_text(encoding='utf-8'))
        assert data['passed'] is True
        assert data['config']['q'] == 7
        assert 'jobs' not in data['config']
        assert data['context']['omega_size'] == 16856
        assert data['sections']['bounds']['nprime'] == {'2': '19/2'}
        assert (tmp_path / 'report.json.txt').exists()
        assert log_file.exists()

    @pytest.mark.slow
    def test_census_at_nine_passes(self, tmp_path, log_file):
        """Test the q = 9 census exits 0 and notes the listed involution rows."""
        out = tmp_path / 'q9.json'
        argv = ['census', '--q', '9', '--trials', '20', '--max-reps', '3', '--out', str(out),
                '--log-file', str(log_file), '--quiet']
        assert main(argv) == EXIT_OK
        data = json.loads(out.read_text(encoding='utf-8'))
        assert data['sections']['census']['x_vector'] == [9, 9, 12, 36, 2, 53, 35, 0]
        listed = [c for c in data['checks'] if c['tag'] == 'table-one-x-listed'][0]
        assert listed['asserted'] is False
        assert listed['violation_count'] == 2


class TestRunner:
    """Tests for the stages, run on the shared q = 7 contexts."""

    def test_census_stage(self, action7, census7):
        """Test the census stage records the census and cube criterion."""
        report = runner_for(action7, census7, trials=50, max_reps=5).run()
        assert report.sections['census']['gamma_r'] == 5040
        assert 'cube_criterion' in report.sections
        assert report.passed

    def test_verify_bg_stage(self, action7, census7):
        """Test the verify-bg stage reuses the census orbits."""
        report = runner_for(action7, census7, command='verify-bg', max_reps=4).run()
        assert report.sections['bg']['verified']
        assert report.passed

    def test_construct_stage(self, action7, census7):
        """Test the construct stage lists one witness per representative."""
        report = runner_for(action7, census7, command='construct', max_reps=3).run()
        assert len(report.sections['construct']) == 3
        assert report.passed

    def test_lab5_stage(self, action7, census7):
        """Test the lab5 stage carries pairs, systems and Weil curves."""
        report = runner_for(action7, census7, command='lab5', max_reps=2, systems=2).run()
        section = report.sections['lab5']
        assert set(section) == {'pairs', 'systems', 'weil'}
        assert report.passed

    def test_all_runs_every_stage(self, action7, census7):
        """Test 'all' runs the five stages in order."""
        runner = runner_for(action7, census7, command='all')
        names = [stage.__name__ for stage in runner.stages()]
        assert names == ['run_census', 'run_verify_bg', 'run_construct', 'run_bounds', 'run_lab5']

    def test_timings_recorded(self, action7, census7):
        """Test each timed stage leaves a timing."""
        report = runner_for(action7, census7, command='bounds', max_reps=2).run()
        assert 'bounds' in report.timings


class TestFirstFailure:
    """Tests for turning failed checks into a CheckFailure."""

    def test_names_every_failed_check(self):
        """Test the message lists each failed tag."""
        a = CheckResult('first')
        a.record(False, case=1)
        b = CheckResult('second')
        b.record(False)
        failure = first_failure([a, b])
        assert isinstance(failure, CheckFailure)
        assert failure.tag == 'first'
        assert 'first, second' in str(failure)
