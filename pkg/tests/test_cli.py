import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qstoch import __version__
from qstoch.cli import main
from qstoch.quantum import basis_measurement, hadamard, random_state
from qstoch.schemas import LawReportSchema
from qstoch.settings import reset_settings
from qstoch.utils import (
    channel_to_json, measurement_to_json, povm_from_json, povm_to_json, state_to_json, write_json,
)


@pytest.fixture
def tetra_file(tmp_path):
    path = tmp_path / "tetra.json"
    assert main(['catalog', '--kind', 'sic', '--dim', '2', '-o', str(path)]) == 0
    return path


@pytest.fixture
def had_file(tmp_path):
    path = tmp_path / "had.json"
    write_json(channel_to_json(hadamard()), path)
    return path


def load(path):
    return json.loads(path.read_text(encoding='utf-8'))


def test_catalog_writes_tetrahedron(tetra_file):
    data = load(tetra_file)
    assert data['dim'] == 2
    assert len(data['effects']) == 4
    assert data['flags']['generalized_sic'] is True


def test_catalog_round_trip_is_bitwise(tetra_file, tmp_path):
    again = tmp_path / "again.json"
    write_json(povm_to_json(povm_from_json(load(tetra_file))), again)
    assert again.read_text(encoding='utf-8') == tetra_file.read_text(encoding='utf-8')


def test_represent_channel(tetra_file, had_file, tmp_path):
    out = tmp_path / "q.json"
    code = main([
        'represent', 'channel', '-o', str(out),
        '--in', str(tetra_file), '--out', str(tetra_file), '--channel', str(had_file),
    ])
    assert code == 0
    data = load(out)
    assert (data['rows'], data['cols']) == (4, 4)
    assert_allclose(np.array(data['matrix']).sum(axis=0), np.ones(4), atol=1e-12)


def test_represent_right_frame(tetra_file, had_file, tmp_path):
    out = tmp_path / "f.json"
    code = main([
        'represent', '--frame', 'right', 'channel', '-o', str(out),
        '--in', str(tetra_file), '--channel', str(had_file),
    ])
    assert code == 0
    assert load(out)['frame'] == 'right'


def test_represent_measurement_left_frame(tetra_file, tmp_path):
    meas = tmp_path / "z.json"
    write_json(measurement_to_json(basis_measurement(2)), meas)
    out = tmp_path / "m.json"
    code = main([
        'represent', '--frame', 'left', 'measurement', '-o', str(out),
        '--povm', str(tetra_file), '--measurement', str(meas),
    ])
    assert code == 0
    data = load(out)
    assert data['frame'] == 'left'
    assert (data['rows'], data['cols']) == (2, 4)


def test_compose_and_tensor(tetra_file, had_file, tmp_path):
    q = tmp_path / "q.json"
    main(['represent', 'channel', '-o', str(q), '--in', str(tetra_file), '--channel', str(had_file)])

    composed = tmp_path / "qq.json"
    assert main(['compose', str(q), str(q), '--povm', str(tetra_file), '-o', str(composed)]) == 0
    # H o H = id，其表示是转移矩阵
    expected = np.eye(4) / 3 + np.ones((4, 4)) / 6
    assert_allclose(np.array(load(composed)['matrix']), expected, atol=1e-12)

    tensor = tmp_path / "qxq.json"
    assert main(['tensor', str(q), str(q), '-o', str(tensor)]) == 0
    assert load(tensor)['rows'] == 16


def test_measure_matches_born(tetra_file, tmp_path):
    state = tmp_path / "rho.json"
    meas = tmp_path / "meas.json"
    rho = random_state(2, seed=3)
    write_json(state_to_json(rho), state)
    write_json(measurement_to_json(basis_measurement(2)), meas)
    out = tmp_path / "p.json"
    code = main(['measure', '--povm', str(tetra_file), '--state', str(state),
                 '--measurement', str(meas), '-o', str(out)])
    assert code == 0
    data = load(out)
    assert data['max_residual'] < 1e-12


def test_negativity_of_tetrahedron(tetra_file, tmp_path):
    out = tmp_path / "neg.json"
    assert main(['--json', 'negativity', str(tetra_file), '-o', str(out)]) == 0
    assert load(out)['inverse'] == pytest.approx(6, abs=1e-9)


def test_extract_constant_map(tmp_path):
    out = tmp_path / "trivial.json"
    assert main(['extract', '--dim', '2', '--weights', '0.5,0.5', '-o', str(out)]) == 0
    data = load(out)
    assert data['flags']['informationally_complete'] is False


def test_extract_from_povm(tetra_file, tmp_path):
    out = tmp_path / "back.json"
    assert main(['extract', '--dim', '2', '--povm', str(tetra_file), '-o', str(out)]) == 0
    extracted = povm_from_json(load(out))
    original = povm_from_json(load(tetra_file))
    for a, b in zip(extracted.effects, original.effects):
        assert_allclose(a, b, atol=1e-8)


def test_verify_dagger_passes(tetra_file, tmp_path):
    out = tmp_path / "report.json"
    code = main(['verify', 'dagger', '--povm', str(tetra_file), '--trials', '50',
                 '--seed', '7', '--tol', '1e-9', '-o', str(out)])
    assert code == 0
    report = LawReportSchema.validate(load(out))
    assert report['passed'] is True
    assert report['seed'] == 7


def test_verify_dagger_fails_for_random_family(tmp_path, capsys):
    povm = tmp_path / "random.json"
    main(['catalog', '--kind', 'random', '--dim', '2', '--seed', '3', '-o', str(povm)])
    code = main(['--json', 'verify', 'dagger', '--povm', str(povm), '--trials', '5'])
    assert code == 1
    report = json.loads(capsys.readouterr().out)
    assert report['passed'] is False


def test_verify_functoriality_with_family(capsys):
    assert main(['verify', 'functoriality', '--dims', '2,3,2', '--trials', '10']) == 0
    assert 'PASS' in capsys.readouterr().out


def test_verify_dichotomy(tmp_path, capsys):
    basis = tmp_path / "basis.json"
    main(['catalog', '--kind', 'basis', '--dim', '2', '-o', str(basis)])
    assert main(['verify', 'dichotomy', '--povm', str(basis)]) == 1
    assert main(['verify', 'dichotomy']) == 0


def test_seed_from_environment(monkeypatch, tetra_file, capsys):
    monkeypatch.setenv('QSTOCH_SEED', '42')
    reset_settings()
    assert main(['--json', 'verify', 'commutant', '--povm', str(tetra_file), '--trials', '2']) == 0
    assert json.loads(capsys.readouterr().out)['seed'] == 42


def test_bad_flag_is_usage_error():
    assert main(['verify', 'dagger', '--trials', 'many']) == 2
    assert main(['no-such-command']) == 2


def test_missing_file(tmp_path, capsys):
    assert main(['negativity', str(tmp_path / "missing.json")]) == 2
    assert '错误' in capsys.readouterr().err


def test_schema_error_reports_path(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({'dim': 2, 'effects': [{'rows': 2, 'cols': 2, 'data': [[1, 0]]}]}))
    assert main(['verify', 'dagger', '--povm', str(bad)]) == 2
    assert '$.effects[0].data' in capsys.readouterr().err


def test_invalid_channel_is_input_error(tetra_file, tmp_path):
    bad = tmp_path / "bad_channel.json"
    write_json({'dim_in': 2, 'dim_out': 2, 'kraus': [
        {'rows': 2, 'cols': 2, 'data': [[0.5, 0], [0, 0], [0, 0], [0.5, 0]]},
    ]}, bad)
    assert main(['represent', 'channel', '--in', str(tetra_file), '--channel', str(bad)]) == 2


def test_config_file(tmp_path, tetra_file, capsys):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({'DEFAULT_SEED': 5}))
    assert main(['--config', str(config), '--json', 'verify', 'commutant', '--povm', str(tetra_file),
                 '--trials', '2']) == 0
    assert json.loads(capsys.readouterr().out)['seed'] == 5


def test_version(capsys):
    assert main(['version']) == 0
    assert __version__ in capsys.readouterr().out
    assert main(['--version']) == 0


def test_bad_config_file(tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({'WORKERS': 0}))
    assert main(['--config', str(config), 'version']) == 2
    assert main(['--config', str(tmp_path / "missing.json"), 'version']) == 2
    assert '配置文件' in capsys.readouterr().err
