import json

import numpy as np
import pytest

from qstoch.exceptions import SchemaError, ValidationError
from qstoch.quantum import random_channel, random_state
from qstoch.representation import represent_channel
from qstoch.schemas import ChoiceField, LawReportSchema, QRepSchema, Schema
from qstoch.utils import (
    channel_from_json, channel_to_json, content_hash, matrix_from_json, matrix_to_json,
    qrep_from_json, qrep_to_json, read_json, state_from_json, state_to_json, trial_rng,
)


def test_error_path_points_at_bad_kraus():
    data = channel_to_json(random_channel(2, 2, 2, seed=0))
    data['kraus'][1]['rows'] = 3
    data['kraus'][1]['data'] += [[0.0, 0.0], [0.0, 0.0]]
    with pytest.raises(SchemaError) as info:
        channel_from_json(data)
    assert info.value.path == '$.kraus[1]'


def test_nested_entry_path():
    data = state_to_json(random_state(2, seed=0))
    data['matrix']['data'][2] = [1.0]
    with pytest.raises(SchemaError) as info:
        state_from_json(data)
    assert info.value.path == '$.matrix.data[2]'


def test_bare_matrix_decoding():
    data = matrix_to_json(np.array([[1, 2j], [-2j, 3]]))
    matrix = matrix_from_json(data)
    assert matrix.dtype == np.complex128
    assert matrix[0, 1] == 2j
    assert not matrix.flags.writeable
    data['rows'] = 3
    with pytest.raises(SchemaError) as info:
        matrix_from_json(data, path='$.effect')
    assert info.value.path == '$.effect.data'


def test_domain_error_becomes_schema_error():
    data = state_to_json(random_state(2, seed=0))
    data['matrix']['data'][0] = [5.0, 0.0]
    with pytest.raises(SchemaError):
        state_from_json(data)


def test_state_qrep_has_one_column():
    with pytest.raises(SchemaError) as info:
        QRepSchema.validate({
            'rows': 2, 'cols': 2, 'matrix': [[1.0, 0.0], [0.0, 1.0]],
            'in_povm': 'a', 'out_povm': 'b', 'kind': 'state',
        })
    assert info.value.path == '$.cols'


def test_qrep_default_frame(tetra, had):
    data = qrep_to_json(represent_channel(tetra, tetra, had))
    del data['frame']
    assert qrep_from_json(data).frame == 'qstoch_t'


def test_report_passed_must_agree():
    report = {
        'law': 'dagger(2)', 'trials': 1, 'max_residual': 1.0, 'tolerance': 1e-9,
        'passed': True, 'seed': 0, 'details': [1.0],
    }
    with pytest.raises(SchemaError) as info:
        LawReportSchema.validate(report)
    assert info.value.path == '$.passed'


def test_choice_field():
    class FrameSchema(Schema):
        frame = ChoiceField(('left', 'right'))

    assert FrameSchema.validate({'frame': 'left'}) == {'frame': 'left'}
    with pytest.raises(SchemaError):
        FrameSchema.validate({'frame': 'up'})
    with pytest.raises(SchemaError) as info:
        FrameSchema.validate({})
    assert info.value.path == '$.frame'


def test_read_json_errors(tmp_path):
    with pytest.raises(ValidationError):
        read_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{", encoding='utf-8')
    with pytest.raises(SchemaError):
        read_json(bad)


def test_state_survives_text(tmp_path):
    rho = random_state(3, seed=4)
    text = json.dumps(state_to_json(rho))
    again = state_from_json(json.loads(text))
    assert np.array_equal(again.matrix, rho.matrix)


def test_content_hash_and_trial_rng():
    assert content_hash(np.eye(2), 'a') == content_hash(np.eye(2), 'a')
    assert content_hash(np.eye(2)) != content_hash(2 * np.eye(2))
    assert len(content_hash('x')) == 16
    assert trial_rng(1, 2).random() == trial_rng(1, 2).random()
    assert trial_rng(1, 2).random() != trial_rng(1, 3).random()
