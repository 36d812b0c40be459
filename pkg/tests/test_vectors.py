import pytest

from fairpool import DemandSet, ResourceVector, WeightVector


def test_resource_vector_basics():
    v = ResourceVector([3, 0, 7])
    assert len(v) == 3
    assert v[2] == 7
    assert list(v) == [3, 0, 7]
    assert v == ResourceVector([3, 0, 7])
    assert v != ResourceVector([3, 0, 8])
    assert hash(v) == hash(ResourceVector([3, 0, 7]))


def test_resource_vector_rejects_bad_components():
    with pytest.raises(ValueError):
        ResourceVector([])
    with pytest.raises(ValueError):
        ResourceVector([1, -1])
    with pytest.raises(ValueError):
        ResourceVector([1.5, 2])
    with pytest.raises(ValueError):
        ResourceVector([True, 2])


def test_resource_vector_arithmetic():
    a = ResourceVector([5, 8])
    b = ResourceVector([2, 3])
    assert a + b == ResourceVector([7, 11])
    assert a - b == ResourceVector([3, 5])
    assert b.scale(4) == ResourceVector([8, 12])
    assert ResourceVector.zeros(2).is_zero()
    assert b.fits_within(a)
    assert not a.fits_within(b)
    with pytest.raises(ValueError):
        b - a  # would go negative
    with pytest.raises(ValueError):
        a + ResourceVector([1])


def test_demand_set_validation():
    ds = DemandSet.from_vectors([[1, 4], [3, 1]])
    assert ds.user_ids == (0, 1)
    assert ds.demands[1] == ResourceVector([3, 1])
    with pytest.raises(ValueError):
        DemandSet([(0, ResourceVector([1, 2])), (0, ResourceVector([2, 1]))])
    with pytest.raises(ValueError):
        DemandSet.from_vectors([[1, 2], [1, 2, 3]])
    with pytest.raises(ValueError):
        DemandSet.from_vectors([[0, 0]])


def test_demand_set_allows_zero_components():
    ds = DemandSet.from_vectors([[0, 5]])
    assert ds.demands[0][0] == 0


def test_weight_vector_validation():
    w = WeightVector([1, 2])
    assert w[1] == 2
    with pytest.raises(ValueError):
        WeightVector([])
    with pytest.raises(ValueError):
        WeightVector([1, 0])
    with pytest.raises(ValueError):
        WeightVector([1, -2])
