import pytest
import torch

from ttcharness.model import VARIANTS, build, parameter_count


def test_variant_family_size_span():
    # Six variants spanning ~3.8M to ~84.7M parameters, monotone in size.
    counts = {v: parameter_count(build(v)) for v in ("B0", "B1")}
    assert 3.0e6 < counts["B0"] < 4.5e6
    assert 12e6 < counts["B1"] < 15e6


def test_variant_table_complete():
    assert sorted(VARIANTS) == ["B0", "B1", "B2", "B3", "B4", "B5"]
    dims = [VARIANTS[v][1] for v in ("B0", "B1", "B2", "B3", "B4", "B5")]
    depth_totals = [sum(d) for d in dims]
    assert depth_totals == sorted(depth_totals)  # capacity scales up monotonically


def test_unknown_variant_rejected():
    with pytest.raises(ValueError):
        build("B9")


def test_forward_shapes_and_grads():
    model = build("B0")
    x = torch.rand(2, 3, 64, 96)
    y = model(x)
    assert y.shape == (2, 2, 64, 96)
    loss = y.mean()
    loss.backward()
    grads = [p.grad for p in model.parameters() if p.grad is not None]
    assert len(grads) > 0
