import numpy as np
import pytest
import torch

from ttcharness.prune import PruneConfig, prunable_names, prune_state_dict, zero_count


def toy_state():
    # two prunable weight tensors plus tensors that must never be touched
    return {
        "a.weight": torch.tensor([[1.0, -2.0], [3.0, -4.0]]),
        "b.weight": torch.tensor([[0.5, -6.0], [2.5, 0.25]]),
        "a.bias": torch.tensor([9.0, 9.0]),
        "norm.weight": torch.tensor([1.0, 1.0]),  # rank 1: not prunable
    }


def test_prunable_selects_rank2_weights_only():
    assert prunable_names(toy_state()) == ["a.weight", "b.weight"]


def test_fraction_zero_is_identity():
    s = toy_state()
    out = prune_state_dict(s, 0.0)
    for k in s:
        assert torch.equal(out[k], s[k])


def test_hand_ranked_global_rule():
    # global magnitudes sorted: 0.25, 0.5, 1, 2, 2.5, 3, 4, 6  (N = 8)
    s = toy_state()
    out = prune_state_dict(s, 0.5)  # floor(0.5 * 8) = 4 smallest zeroed
    assert torch.equal(out["a.weight"], torch.tensor([[0.0, 0.0], [3.0, -4.0]]))
    assert torch.equal(out["b.weight"], torch.tensor([[0.0, -6.0], [2.5, 0.0]]))
    assert torch.equal(out["a.bias"], s["a.bias"])
    assert torch.equal(out["norm.weight"], s["norm.weight"])


def test_hand_ranked_all_grid_fractions():
    s = toy_state()
    # ascending |w| with flat-order tiebreak:
    order = [("b.weight", 3), ("b.weight", 0), ("a.weight", 0), ("a.weight", 1),
             ("b.weight", 2), ("a.weight", 2), ("a.weight", 3), ("b.weight", 1)]
    for f in [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]:
        out = prune_state_dict(s, f)
        k = int(f * 8)
        zeroed = set(order[:k])
        for name in ("a.weight", "b.weight"):
            flat_in = s[name].reshape(-1)
            flat_out = out[name].reshape(-1)
            for i in range(4):
                if (name, i) in zeroed:
                    assert flat_out[i] == 0.0, (f, name, i)
                else:
                    assert flat_out[i] == flat_in[i], (f, name, i)
        assert zero_count(out) == k


def test_zero_count_monotone_in_fraction():
    torch.manual_seed(0)
    s = {"w1.weight": torch.randn(40, 10), "w2.weight": torch.randn(8, 8, 3, 3)}
    counts = [zero_count(prune_state_dict(s, f)) for f in np.arange(0.0, 1.0, 0.1)]
    total = 400 + 576
    assert counts == [int(f * total) for f in np.arange(0.0, 1.0, 0.1)]
    assert counts == sorted(counts)


def test_tie_break_is_flat_order():
    s = {"t.weight": torch.tensor([[2.0, -2.0, 2.0, -2.0]])}
    out = prune_state_dict(s, 0.5)  # floor(0.5*4) = 2: first two in flat order
    assert torch.equal(out["t.weight"], torch.tensor([[0.0, 0.0, 2.0, -2.0]]))


def test_per_layer_scope():
    s = toy_state()
    out = prune_state_dict(s, 0.5, scope="per_layer")
    # each tensor loses floor(0.5*4) = 2 of its own smallest
    assert torch.equal(out["a.weight"], torch.tensor([[0.0, 0.0], [3.0, -4.0]]))
    assert torch.equal(out["b.weight"], torch.tensor([[0.0, -6.0], [2.5, 0.0]]))


def test_prune_config_validation():
    PruneConfig()
    with pytest.raises(ValueError):
        PruneConfig(fractions=[0.2, 0.1])
    with pytest.raises(ValueError):
        PruneConfig(fractions=[0.5, 1.0])
    with pytest.raises(ValueError):
        prune_state_dict(toy_state(), 1.0)
