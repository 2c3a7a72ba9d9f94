import json
import os

import pytest

import study
from files import read_file
from linalg import SingularSystemError
from study import ConfigError, StudyConfig, load_config, make_config, mesh_family, run_study


STUDIES = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'studies')


def test_default_family():
    assert mesh_family(StudyConfig()) == [(2, 2), (4, 4), (8, 8), (16, 16), (32, 32)]
    assert mesh_family(StudyConfig(family=(1, 3), levels=3)) == [(1, 3), (2, 6), (4, 12)]
    assert mesh_family(make_config({'meshes': '2,2;4x4'})) == [(2, 2), (4, 4)]


def test_parse_params():
    assert study.parse_params('levels:3,scheme:wilson') == {'levels': '3', 'scheme': 'wilson'}
    assert study.parse_params('') == {}
    with pytest.raises(ConfigError):
        study.parse_params('levels=3')


def test_config_precedence(tmp_path):
    path = tmp_path / 'study.json'
    path.write_text(json.dumps({'scheme': 'wilson', 'family': [8, 8], 'levels': 3}))
    args = {'--param': 'levels:2,quad_area:5,scheme:cr', '--config': str(path), '--levels': '4'}
    config = load_config(args)
    assert config.scheme == 'wilson'
    assert config.family == (8, 8)
    assert config.levels == 4
    assert config.quad_area == 5
    assert config.quad_line == 3


def test_study_files_load():
    config = load_config({'--config': STUDIES + '/wilson_interpolant.json'})
    assert config.interpolant
    assert mesh_family(config)[-1] == (64, 64)
    config = load_config({'--config': STUDIES + '/cr_1_20.json'})
    assert mesh_family(config)[-1] == (64, 1280)


@pytest.mark.parametrize('values', [
    {'scheme': 'fem'},
    {'levels': 0},
    {'levels': 'three'},
    {'family': '2'},
    {'family': [0, 2]},
    {'meshes': [[2, 2], [3, 3]]},
    {'meshes': []},
    {'interpolant': True},
    {'interpolant': 'maybe', 'scheme': 'wilson'},
    {'threads': None},
    {'colour': 'red'},
])
def test_invalid_configurations(values):
    with pytest.raises(ConfigError):
        make_config(values)


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigError):
        load_config({'--config': str(tmp_path / 'missing.json')})
    path = tmp_path / 'list.json'
    path.write_text('[1, 2]')
    with pytest.raises(ConfigError):
        load_config({'--config': str(path)})


def test_cr_study(problem):
    report = run_study(StudyConfig(family=(2, 2), levels=2), problem)
    assert report.family == 'cr-2x2'
    assert [row.n for row in report.rows] == [16, 56]
    assert report.column('h1') == pytest.approx([8.460e-2, 4.593e-2], rel=1e-3)
    assert report.orders('h1')[1] == pytest.approx(0.88, abs=0.01)
    assert report.column('l2')[1] < report.column('l2')[0]


def test_wilson_study_with_interpolant():
    report = run_study(make_config({'scheme': 'wilson', 'family': [2, 2], 'levels': 2,
                                    'interpolant': True}))
    assert report.norms == ('h1', 'l2', 'h1_conf', 'l2_conf')
    assert [row.n for row in report.rows] == [9 + 8, 25 + 32]
    for norm in report.norms:
        assert all(0 < e < 1 for e in report.column(norm))
    header = report.to_csv().splitlines()[0]
    assert header.endswith('err_h1_conf,order_h1_conf,err_l2_conf,order_l2_conf')


def test_matrix_dump(tmp_path):
    path = tmp_path / 'matrix.txt'
    run_study(make_config({'family': [1, 1], 'levels': 2, 'dump_matrix': str(path)}))
    lines = read_file(str(path)).splitlines()
    # four identity rows plus the diagonal edge coupled to all five edges
    assert len(lines) == 9
    assert lines[0] == '0 0 1'


def test_solver_failure_names_the_mesh(monkeypatch):
    def fail(system):
        raise SingularSystemError('Matrix has an empty row', row=3)

    monkeypatch.setattr(study, 'solve_cr', fail)
    with pytest.raises(SingularSystemError, match=r'mesh \(2,2\)'):
        run_study(StudyConfig(levels=1))
