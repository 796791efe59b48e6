import os

import numpy as np
import pytest

from config import MAPPINGS_DIR
from errors import DSLError, InputError, MappingValidationError
from mapping.dsl import format_number, parse_mapping
from mapping.gallery import default_dsl, gallery_entry, gallery_get, gallery_list
from mapping.loader import load_mapping, parse_gallery_reference, source_hash
from mapping.model import FixedPointSet, MappingDef
from space.domains import DomainSet
from space.norms import NormSpec

FIXTURES = os.path.join(os.path.dirname(__file__), 'fixtures')


def read_fixture(name):
    with open(os.path.join(FIXTURES, name), 'r', encoding='utf-8') as f:
        return f.read()


def test_parse_halving_fixture():
    mapping = parse_mapping(read_fixture('halving.map'), name='halving')
    assert mapping.validated
    assert mapping.evaluate([1.0])[0] == 0.5
    assert mapping.evaluate([0.0])[0] == 0.0


def test_step_file_matches_gallery():
    mapping, _ = load_mapping(os.path.join(MAPPINGS_DIR, 'step.map'))
    reference = gallery_get('suzuki-step')
    grid = reference.domain.grid(301)
    np.testing.assert_array_equal(mapping.evaluate_many(grid), reference.evaluate_many(grid))


@pytest.mark.parametrize('gallery_id', [e.id for e in gallery_list() if e.has_dsl])
def test_dsl_round_trip_matches_gallery(gallery_id):
    reference = gallery_get(gallery_id)
    parsed = parse_mapping(default_dsl(gallery_id), name=gallery_id)
    grid = reference.domain.grid(1001)
    diff = np.abs(parsed.evaluate_many(grid) - reference.evaluate_many(grid))
    assert diff.max() <= 1e-15


def test_guard_gap_is_located():
    with pytest.raises(DSLError) as exc:
        parse_mapping(read_fixture('gap.map'))
    assert exc.value.line == 3
    assert 'gap' in str(exc.value)
    assert 'line 3' in str(exc.value)


def test_guard_overlap_is_located():
    with pytest.raises(DSLError) as exc:
        parse_mapping(read_fixture('overlap.map'))
    assert exc.value.line == 3
    assert 'overlaps' in str(exc.value)


def test_image_escape_is_located():
    with pytest.raises(DSLError) as exc:
        parse_mapping(read_fixture('escape.map'))
    assert exc.value.line == 2
    assert exc.value.column == 15
    assert exc.value.token == '2*x'
    assert 'escapes' in str(exc.value)


def test_syntax_error_is_located():
    with pytest.raises(DSLError) as exc:
        parse_mapping("domain interval 0 1\npiece [0,1 : x\n")
    assert exc.value.line == 2
    assert exc.value.column is not None


def test_missing_domain_line():
    with pytest.raises(DSLError) as exc:
        parse_mapping("piece [0,1] : x\n")
    assert exc.value.line == 1


def test_dsl_errors_are_input_errors():
    with pytest.raises(InputError):
        parse_mapping(read_fixture('gap.map'))


def test_format_number():
    from fractions import Fraction
    assert format_number(Fraction(1, 4)) == '0.25'
    assert format_number(Fraction(3)) == '3'
    assert format_number(Fraction(1, 3)) == repr(1 / 3)


def test_gallery_list_hides_test_only():
    ids = [e.id for e in gallery_list()]
    assert len(ids) >= 6
    assert 'doubling' not in ids
    assert 'doubling' in [e.id for e in gallery_list(include_test_only=True)]


def test_gallery_entries_have_annotations():
    for entry in gallery_list():
        known = entry.known_properties()
        assert set(known) == {'nonexpansive', 'condition-c', 'rsc', 'quasi-nonexpansive'}


def test_gallery_unknown_id():
    with pytest.raises(InputError):
        gallery_get('no-such-map')


def test_gallery_unknown_parameter():
    with pytest.raises(InputError):
        gallery_entry('halving').build(a=2.0)


def test_gallery_reference_parameters():
    assert parse_gallery_reference('gallery:affine-contraction:a=0.5,b=0.25') == (
        'affine-contraction', {'a': 0.5, 'b': 0.25}
    )
    mapping, digest = load_mapping('gallery:affine-contraction:a=0.5,b=0.25')
    assert mapping.fixed_points.points == ((0.5,),)
    assert digest == source_hash('gallery:affine-contraction:b=0.25,a=0.5')


def test_missing_mapping_file():
    with pytest.raises(FileNotFoundError):
        load_mapping('does/not/exist.map')


def test_evaluate_outside_domain():
    with pytest.raises(InputError):
        gallery_get('halving').evaluate([1.5])


def test_self_map_validation():
    with pytest.raises(MappingValidationError):
        MappingDef.create('double', DomainSet.interval(0.0, 1.0), lambda x: 2.0 * x)


def test_doubling_built_without_validation():
    mapping = gallery_get('doubling')
    assert not mapping.validated
    assert mapping.evaluate([0.5])[0] == 1.0


def test_with_norm_changes_space():
    mapping = gallery_get('box-halving').with_norm(1.0)
    assert mapping.space == NormSpec(p=1.0, dim=2)
    assert mapping.residuals([[1.0, 1.0]])[0] == 1.0


def test_fixed_point_set_distance():
    space = NormSpec(p=2, dim=1)
    fps = FixedPointSet.of(0.0, 1.0)
    np.testing.assert_allclose(fps.distance(space, [[0.25], [0.75]]), [0.25, 0.25])
    assert FixedPointSet(whole_domain=True).distance(space, [[0.3]])[0] == 0.0
    assert FixedPointSet().empty


def test_to_dsl_requires_pieces():
    with pytest.raises(InputError):
        gallery_get('box-halving').to_dsl()


def test_rounded_image_at_domain_edge_is_accepted():
    mapping = parse_mapping("domain interval 0 0.3\npiece [0,0.3] : 0.1*x + 0.27\n")
    assert mapping.validated
    image = mapping.evaluate([0.3])[0]
    assert image == 0.3
    assert mapping.domain.contains([image])


@pytest.mark.parametrize('gallery_id', [e.id for e in gallery_list()])
def test_shipped_gallery_maps_into_domain(gallery_id):
    mapping = gallery_get(gallery_id)
    grid = mapping.domain.grid(10_000 if mapping.dim == 1 else 100)
    assert mapping.domain.contains_many(mapping.evaluate_many(grid)).all()


def test_shipped_dsl_file_maps_into_domain():
    mapping, _ = load_mapping(os.path.join(MAPPINGS_DIR, 'step.map'))
    grid = mapping.domain.grid(10_000)
    assert mapping.domain.contains_many(mapping.evaluate_many(grid)).all()
