import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqnn.errors import ConfigError, ProtocolError, ShapeError
from seqnn.harness.gradcheck import GradCase, check, srn_step_module
from seqnn.nn import (
    CAddTable, ConcatTable, Identity, Linear, LookupTable, ParallelTable, SelectTable, Sequential,
    Sigmoid, Tanh,
)
from seqnn.rnn import LSTM, Recurrence, Recurrent, Recursor, set_online
from seqnn.sequencers import Sequencer

import oracles as O


def seq(rng, T, batch, size):
    return [rng.standard_normal((batch, size)) for _ in range(T)]


# -- Recurrent ---------------------------------------------------------------------------


def test_recurrent_zero_weights_give_half():
    rec = Recurrent(3, Linear(2, 3, rng=0), Linear(3, 3, rng=0), Sigmoid())
    for p in rec.parameters():
        p[...] = 0.0
    for x in seq(np.random.default_rng(0), 4, 2, 2):
        np.testing.assert_array_equal(rec.forward(x), np.full((2, 3), 0.5))


def test_recurrent_identity_input_zero_feedback_is_stateless():
    fb = Linear(3, 3, rng=0)
    for p in fb.parameters():
        p[...] = 0.0
    rec = Recurrent(3, Identity(), fb, Tanh())
    xs = seq(np.random.default_rng(1), 4, 2, 3)
    for x in xs:
        np.testing.assert_allclose(rec.forward(x), np.tanh(x), atol=1e-15)


def test_recurrent_start_bias_is_zero_initialized():
    rec = Recurrent(4, Linear(2, 4, rng=0), Linear(4, 4, rng=0), Sigmoid())
    np.testing.assert_array_equal(rec.params["bias"], np.zeros(4))


def test_recurrent_branch_mismatch_is_config_error():
    with pytest.raises(ConfigError):
        Recurrent(3, Linear(2, 3, rng=0), Linear(3, 4, rng=0), Sigmoid())
    with pytest.raises(ConfigError):
        Recurrent(5, Linear(2, 3, rng=0), Linear(3, 3, rng=0), Sigmoid())


def test_recurrent_scalar_three_steps_match_unrolled_composite():
    rng = np.random.default_rng(2)
    rec = O.make_recurrent(rng, n_in=1, hidden=1)
    xs, gs = seq(rng, 3, 1, 1), seq(rng, 3, 1, 1)
    ref_out, ref_grads, ref_gx = O.unroll_recurrent(rec, xs, gs)
    s = Sequencer(rec)
    out = s.forward(xs)
    rec.zero_grad_parameters()
    gx = s.backward(xs, gs)
    assert O.max_diff(out, ref_out) <= 1e-12
    assert O.max_diff(out, O.recurrent_numpy(rec, xs)) <= 1e-12
    assert O.max_diff(gx, ref_gx) <= 1e-12
    assert O.max_diff([g for _, g in rec.parameter_pairs()],
                      [ref_grads[id(p)] for p, _ in rec.parameter_pairs()]) <= 1e-12


# -- LSTM --------------------------------------------------------------------------------


def test_lstm_zero_parameters_give_zero_hidden():
    lstm = LSTM(3, 4, rng=0)
    for p in lstm.parameters():
        p[...] = 0.0
    h = lstm.forward(np.random.default_rng(0).standard_normal((2, 3)))
    np.testing.assert_array_equal(h, np.zeros((2, 4)))


def test_lstm_saturated_forget_gate_preserves_cell():
    lstm = LSTM(1, 1, rng=0)
    for p in lstm.parameters():
        p[...] = 0.0
    # step 1 writes into the cell through the input path: z = tanh(x), i = 0.5
    lstm.gate_block("weight_x", "z")[...] = 1.0
    lstm.forward(np.array([[2.0]]))
    c1 = lstm._states[1].state[1].copy()
    np.testing.assert_allclose(c1, 0.5 * np.tanh(2.0), atol=1e-15)
    # then freeze: f = sigmoid(100) == 1.0 in float64, zero input keeps z = 0
    lstm.gate_block("bias", "f")[...] = 100.0
    for _ in range(3):
        lstm.forward(np.array([[0.0]]))
    np.testing.assert_array_equal(lstm._states[lstm.step - 1].state[1], c1)


def test_lstm_matches_numpy_reference():
    rng = np.random.default_rng(3)
    lstm = LSTM(3, 4, rng=rng)
    xs = seq(rng, 5, 2, 3)
    out = Sequencer(lstm).forward(xs)
    assert O.max_diff(out, O.lstm_numpy(lstm.params, xs)) <= 1e-14


@pytest.mark.parametrize("fused", [True, False])
def test_lstm_two_steps_match_unrolled_primitives(fused):
    rng = np.random.default_rng(4)
    lstm = LSTM(3, 3, fused=fused, rng=rng)
    xs, gs = seq(rng, 2, 2, 3), seq(rng, 2, 2, 3)
    ref_out, ref_grads, ref_gx = O.unroll_lstm(lstm, xs, gs)
    s = Sequencer(lstm)
    out = s.forward(xs)
    lstm.zero_grad_parameters()
    gx = s.backward(xs, gs)
    assert O.max_diff(out, ref_out) <= 1e-10
    assert O.max_diff(gx, ref_gx) <= 1e-10
    assert O.max_diff([lstm.grads[k] for k in ref_grads], list(ref_grads.values())) <= 1e-10


def test_lstm_nonpositive_sizes():
    with pytest.raises(ConfigError):
        LSTM(0, 3)
    with pytest.raises(ConfigError):
        LSTM(3, -2)
    with pytest.raises(ConfigError):
        LSTM(3, 3, rho=0)


def test_lstm_wrong_input_width_is_shape_error():
    with pytest.raises(ShapeError):
        LSTM(3, 2, rng=0).forward(np.ones((1, 4)))


def test_peepholes_are_vectors():
    lstm = LSTM(2, 5, rng=0)
    assert lstm.params["peephole"].shape == (3, 5)
    assert lstm.gate_block("peephole", "o").shape == (5,)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 3), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_lstm_hidden_is_bounded_and_matches_reference(n_in, hidden, batch, T, seed):
    rng = np.random.default_rng(seed)
    lstm = LSTM(n_in, hidden, rng=rng)
    xs = [rng.standard_normal((batch, n_in)) * 3 for _ in range(T)]
    out = Sequencer(lstm).forward(xs)
    assert all(np.all(np.abs(h) < 1) for h in out)
    assert O.max_diff(out, O.lstm_numpy(lstm.params, xs)) <= 1e-12


# -- Recurrence ----------------------------------------------------------------------------


def test_recurrence_additive_running_sum():
    r = Recurrence(CAddTable(), 1, 1)
    outs = [r.forward(np.array([[v]]))[0, 0] for v in (1.0, 2.0, 3.0)]
    assert outs == [1.0, 3.0, 6.0]


def test_recurrence_srn_equals_recurrent_with_matched_parameters():
    rng = np.random.default_rng(5)
    V, H = 6, 4
    rm = srn_step_module(V, H, rng)
    lookup, lin = rm.modules_[0].modules_
    rec_lookup, rec_lin = LookupTable(V, H, rng=0), Linear(H, H, rng=0)
    rec = Recurrent(H, rec_lookup, rec_lin, Sigmoid())
    rec_lookup.params["weight"][...] = lookup.params["weight"]
    rec_lin.params["weight"][...] = lin.params["weight"]
    rec_lin.params["bias"][...] = lin.params["bias"]
    # Recurrence sees W*0 + b at step 1; Recurrent sees its start bias there
    rec.params["bias"][...] = lin.params["bias"]
    xs = [rng.integers(1, V + 1, size=3) for _ in range(4)]
    a = Sequencer(Recurrence(rm, H, 1)).forward(xs)
    b = Sequencer(rec).forward(xs)
    assert O.max_diff(a, b) <= 1e-15


def test_recurrence_gradcheck_three_steps():
    rng = np.random.default_rng(6)
    rm = Sequential(
        ParallelTable(Linear(2, 3, rng=rng), Linear(3, 3, rng=rng)),
        CAddTable(), Tanh(),
    )
    case = GradCase("recurrence", Sequencer(Recurrence(rm, 3, 1)), seq(rng, 3, 2, 2))
    assert check(case).max_rel_error <= 1e-5


def test_recurrence_output_size_mismatch():
    r = Recurrence(Sequential(CAddTable(), Linear(3, 2, rng=0)), 3, 1)
    with pytest.raises(ShapeError):
        r.forward(np.ones((2, 3)))


def test_recurrence_table_state():
    # carries a pair {a, b} and returns {a + x, b + 2x}
    rm = ConcatTable(
        Sequential(ConcatTable(SelectTable(1), Sequential(SelectTable(2), SelectTable(1))), CAddTable()),
        Sequential(ConcatTable(SelectTable(1), SelectTable(1), Sequential(SelectTable(2), SelectTable(2))),
                   CAddTable()),
    )
    r = Recurrence(rm, [2, 2], 1)
    for _ in range(3):
        out = r.forward(np.ones((1, 2)))
    np.testing.assert_array_equal(out[0], [[3.0, 3.0]])
    np.testing.assert_array_equal(out[1], [[6.0, 6.0]])


# -- Recursor ------------------------------------------------------------------------------


def test_recursor_linear_is_three_shared_linears():
    rng = np.random.default_rng(7)
    lin = Linear(3, 2, rng=rng)
    xs, gs = seq(rng, 3, 2, 3), seq(rng, 3, 2, 2)
    s = Sequencer(Recursor(lin))
    out = s.forward(xs)
    lin.zero_grad_parameters()
    s.backward(xs, gs)
    for x, y in zip(xs, out):
        np.testing.assert_allclose(y, x @ lin.params["weight"].T + lin.params["bias"], atol=1e-15)
    expected = sum(g.T @ x for g, x in zip(gs, xs))
    np.testing.assert_allclose(lin.grads["weight"], expected, atol=1e-14)


def test_recursor_gradcheck():
    rng = np.random.default_rng(8)
    m = Recursor(Sequential(Linear(3, 2, rng=rng), Tanh()))
    case = GradCase("recursor", m, seq(rng, 3, 2, 3), legacy=True)
    assert check(case).max_rel_error <= 1e-5


def test_recursor_of_lstm_stack_equals_sequencer_stack():
    rng = np.random.default_rng(9)
    a, b = LSTM(3, 4, rng=rng), LSTM(4, 2, rng=rng)
    xs, gs = seq(rng, 4, 2, 3), seq(rng, 4, 2, 2)
    rec = Recursor(Sequential(a, b))
    set_online(rec)
    out1 = [rec.forward(x).copy() for x in xs]
    rec.zero_grad_parameters()
    g1 = [rec.backward(x, g) for x, g in reversed(list(zip(xs, gs)))][::-1]
    p1 = O.param_grads(rec)
    stack = Sequential(Sequencer(a), Sequencer(b))
    out2 = stack.forward(xs)
    stack.zero_grad_parameters()
    g2 = stack.backward(xs, gs)
    assert O.max_diff(out1, out2) <= 1e-12
    assert O.max_diff(g1, g2) <= 1e-12
    assert O.max_diff(p1, O.param_grads(stack)) <= 1e-12


# -- step clones and lifecycle -------------------------------------------------------------


def test_step_clone_is_idempotent_and_aliases_parameters():
    rng = np.random.default_rng(10)
    rec = O.make_recurrent(rng)
    c2 = rec.step_clone(2)
    assert rec.step_clone(2) is c2
    lin = c2.modules_[0].modules_[0]
    assert lin.params["weight"] is rec.input_layer.params["weight"]
    rec.input_layer.params["weight"][...] = 0.0
    x = rng.standard_normal((1, 3))
    np.testing.assert_array_equal(lin.forward(x), np.broadcast_to(rec.input_layer.params["bias"], (1, 4)))
    with pytest.raises(ConfigError):
        rec.step_clone(0)


def test_clones_are_recycled_beyond_rho():
    rng = np.random.default_rng(11)
    lstm = LSTM(2, 3, rho=3, fused=False, rng=rng)
    for x in seq(rng, 50, 1, 2):
        lstm.forward(x)
    assert lstm.live_states() <= 4
    assert lstm.live_clones() <= 5


def test_distinct_parameter_storage_is_independent_of_length():
    rng = np.random.default_rng(12)
    counts = []
    for T in (2, 20):
        lstm = LSTM(2, 3, rho=5, fused=False, rng=0)
        s = Sequencer(lstm)
        s.forward(seq(rng, T, 1, 2))
        # composite cells hold views; count the underlying buffers
        counts.append(len({id(p if p.base is None else p.base)
                           for m in [lstm] + lstm._all_clones for p, _ in m.parameter_pairs()}))
    assert counts[0] == counts[1] == 4


@pytest.mark.parametrize("make", [
    lambda: LSTM(3, 4, rho=5, rng=0),
    lambda: O.make_recurrent(np.random.default_rng(0), rho=5),
])
def test_live_states_bounded_in_training_and_constant_in_eval(make):
    rng = np.random.default_rng(13)
    r = make()
    xs = seq(rng, 200, 1, 3)
    peak = 0
    for x in xs:
        r.forward(x)
        peak = max(peak, r.live_states())
    assert peak <= r.rho + 1
    r.forget()
    r.eval()
    for x in xs:
        r.forward(x)
        assert r.live_states() == 1


def test_step_counter_and_forget():
    rng = np.random.default_rng(14)
    lstm = LSTM(2, 3, rng=rng)
    lstm.forget()  # no-op on a fresh module
    assert lstm.step == 1
    x = rng.standard_normal((2, 2))
    first = lstm.forward(x).copy()
    lstm.forward(x)
    assert lstm.step == 3
    params = [p.copy() for p in lstm.parameters()]
    lstm.forget()
    assert lstm.step == 1
    np.testing.assert_array_equal(lstm.forward(x), first)
    for a, b in zip(params, lstm.parameters()):
        np.testing.assert_array_equal(a, b)


# -- legacy protocol and truncation ---------------------------------------------------------


def _legacy(r, xs, gs):
    r.forget()
    r.zero_grad_parameters()
    outs = []
    for x, g in zip(xs, gs):
        outs.append(r.forward(x).copy())
        assert r.backward(x, g) is None
    return outs, r.backward_through_time()


def test_legacy_protocol_matches_online():
    rng = np.random.default_rng(15)
    lstm = LSTM(3, 2, rng=rng)
    xs, gs = seq(rng, 4, 2, 3), seq(rng, 4, 2, 2)
    out_l, gin = _legacy(lstm, xs, gs)
    p_l = O.param_grads(lstm)
    assert sorted(gin) == [1, 2, 3, 4]
    s = Sequencer(lstm)
    out_o = s.forward(xs)
    lstm.zero_grad_parameters()
    g_o = s.backward(xs, gs)
    assert O.max_diff(out_l, out_o) <= 1e-15
    assert O.max_diff([gin[t] for t in sorted(gin)], g_o) <= 1e-14
    assert O.max_diff(p_l, O.param_grads(lstm)) <= 1e-14


def test_single_step_bptt_is_plain_backward():
    rng = np.random.default_rng(16)
    rec = Recursor(Sequential(Linear(3, 2, rng=rng), Tanh()))
    x, g = rng.standard_normal((2, 3)), rng.standard_normal((2, 2))
    _, gin = _legacy(rec, [x], [g])
    plain = rec.module.shared_clone()
    plain.forward(x)
    np.testing.assert_allclose(gin[1], plain.backward(x, g), atol=1e-15)


def test_bptt_without_grad_outputs_is_protocol_error():
    lstm = LSTM(2, 2, rng=0)
    lstm.forward(np.ones((1, 2)))
    with pytest.raises(ProtocolError):
        lstm.backward_through_time()


def test_backward_before_forward_is_protocol_error():
    with pytest.raises(ProtocolError):
        LSTM(2, 2, rng=0).backward(np.ones((1, 2)), np.ones((1, 2)))


@pytest.mark.parametrize("legacy", [False, True])
def test_truncated_bptt_equals_suffix_bptt(legacy):
    rng = np.random.default_rng(17)
    lstm = LSTM(3, 3, rho=2, rng=rng)
    xs, gs = seq(rng, 5, 2, 3), seq(rng, 5, 2, 3)
    _, ref_grads, ref_gx = O.truncated_suffix_oracle(lstm, xs, gs, 2)
    if legacy:
        _, gin = _legacy(lstm, xs, gs)
        assert sorted(gin) == [4, 5]
        got_gx = [gin[4], gin[5]]
    else:
        s = Sequencer(lstm)
        s.forward(xs)
        lstm.zero_grad_parameters()
        g = s.backward(xs, gs)
        for t in range(3):
            np.testing.assert_array_equal(g[t], np.zeros_like(xs[t]))
        got_gx = g[3:]
    assert O.max_diff(got_gx, ref_gx) <= 1e-10
    assert O.max_diff([lstm.grads[k] for k in ref_grads], list(ref_grads.values())) <= 1e-10


def test_training_memory_for_long_sequence():
    rng = np.random.default_rng(18)
    lstm = LSTM(2, 3, rho=2, rng=rng)
    s = Sequencer(lstm)
    xs = seq(rng, 1000, 1, 2)
    s.forward(xs)
    assert lstm.live_states() <= 3
    g = s.backward(xs, [np.ones((1, 3))] * 1000)
    assert len(g) == 1000
