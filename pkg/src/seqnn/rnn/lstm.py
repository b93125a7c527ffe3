"""LSTM layer with diagonal peephole connections.

Per step, with gate blocks ordered (i, f, z, o)::

    i_t = sigmoid(Wxi x_t + Whi h_{t-1} + wci * c_{t-1} + bi)
    f_t = sigmoid(Wxf x_t + Whf h_{t-1} + wcf * c_{t-1} + bf)
    z_t = tanh(Wxz x_t + Whz h_{t-1} + bz)
    c_t = f_t * c_{t-1} + i_t * z_t
    o_t = sigmoid(Wxo x_t + Who h_{t-1} + wco * c_t + bo)
    h_t = o_t * tanh(c_t)

with h_0 = c_0 = 0. Parameters are packed: ``weight_x`` (4H x I),
``weight_h`` (4H x H), ``bias`` (4H) and ``peephole`` (3 x H, rows i, f, o).
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError
from ..nn.containers import CAddTable, CMulTable, ConcatTable, SelectTable, Sequential
from ..nn.layers import CMul, Linear, Sigmoid, Tanh
from ..nn.module import Module
from ..tensor import fill_uniform, make_rng, map_sigmoid, map_tanh
from .abstract import AbstractRecurrent

GATES = "ifzo"
PEEPHOLES = "ifo"


class LSTMCell(Module):
    """Fused single-step kernel: {x, h_prev, c_prev} -> {h, c}.

    Reads the owning LSTM's parameter dicts directly, so every clone of the cell
    shares storage with the layer.
    """

    _abstract = True

    def __init__(self, owner: "LSTM"):
        super().__init__()
        self.hidden = owner.output_size
        self.params = owner.params
        self.grads = owner.grads

    def update_output(self, input):
        x, h_prev, c_prev = input
        p = self.params
        H = self.hidden
        a = x @ p["weight_x"].T + h_prev @ p["weight_h"].T + p["bias"]
        peep = p["peephole"]
        i = map_sigmoid(a[:, :H] + c_prev * peep[0])
        f = map_sigmoid(a[:, H:2 * H] + c_prev * peep[1])
        z = map_tanh(a[:, 2 * H:3 * H])
        c = f * c_prev + i * z
        o = map_sigmoid(a[:, 3 * H:] + c * peep[2])
        tc = map_tanh(c)
        self._cache = (i, f, z, o, c, tc)
        return [o * tc, c]

    def backward(self, input, grad_output):
        self._check_forwarded()
        x, h_prev, c_prev = input
        gh, gc = grad_output
        i, f, z, o, c, tc = self._cache
        p, g = self.params, self.grads
        peep = p["peephole"]

        dao = gh * tc * o * (1.0 - o)
        dc = gc + gh * o * (1.0 - tc * tc) + dao * peep[2]
        dai = dc * z * i * (1.0 - i)
        daf = dc * c_prev * f * (1.0 - f)
        daz = dc * i * (1.0 - z * z)
        da = np.concatenate([dai, daf, daz, dao], axis=1)

        dx = da @ p["weight_x"]
        dh = da @ p["weight_h"]
        dc_prev = dc * f + dai * peep[0] + daf * peep[1]

        g["weight_x"] += da.T @ x
        g["weight_h"] += da.T @ h_prev
        g["bias"] += da.sum(axis=0)
        g["peephole"][0] += (dai * c_prev).sum(axis=0)
        g["peephole"][1] += (daf * c_prev).sum(axis=0)
        g["peephole"][2] += (dao * c).sum(axis=0)

        self.grad_input = [dx, dh, dc_prev]
        return self.grad_input


def _view_linear(weight, grad_weight, bias=None, grad_bias=None) -> Linear:
    out_size, in_size = weight.shape
    lin = Linear(in_size, out_size, bias=bias is not None, rng=0)
    lin.params = {"weight": weight}
    lin.grads = {"weight": grad_weight}
    if bias is not None:
        lin.params["bias"] = bias
        lin.grads["bias"] = grad_bias
    return lin


def _view_cmul(weight, grad_weight) -> CMul:
    m = CMul(weight.shape[0], rng=0)
    m.params = {"weight": weight}
    m.grads = {"weight": grad_weight}
    return m


def lstm_cell_composite(lstm: "LSTM") -> Module:
    """The step function assembled from generic modules.

    Input {x, h_prev, c_prev}, output {h, c}. Every Linear/CMul inside is a view
    into the layer's packed storage, so this composite and the fused cell can be
    swapped without touching the parameters.
    """
    H = lstm.output_size
    p, g = lstm.params, lstm.grads

    def block(name, q):
        k = GATES.index(q)
        return p[name][k * H:(k + 1) * H], g[name][k * H:(k + 1) * H]

    def pre_activation(q, cell_slot=None):
        wx, gwx = block("weight_x", q)
        b, gb = block("bias", q)
        wh, gwh = block("weight_h", q)
        branches = [
            Sequential(SelectTable(1), _view_linear(wx, gwx, b, gb)),
            Sequential(SelectTable(2), _view_linear(wh, gwh)),
        ]
        if cell_slot is not None:
            k = PEEPHOLES.index(q)
            branches.append(Sequential(SelectTable(cell_slot), _view_cmul(p["peephole"][k], g["peephole"][k])))
        return Sequential(ConcatTable(*branches), CAddTable())

    input_gate = Sequential(pre_activation("i", 3), Sigmoid())
    forget_gate = Sequential(pre_activation("f", 3), Sigmoid())
    cell_input = Sequential(pre_activation("z"), Tanh())
    new_cell = Sequential(
        ConcatTable(
            Sequential(ConcatTable(forget_gate, SelectTable(3)), CMulTable()),
            Sequential(ConcatTable(input_gate, cell_input), CMulTable()),
        ),
        CAddTable(),
    )
    # {x, h_prev, c_prev} -> {x, h_prev, c_prev, c}
    stage1 = ConcatTable(SelectTable(1), SelectTable(2), SelectTable(3), new_cell)
    output_gate = Sequential(pre_activation("o", 4), Sigmoid())
    hidden = Sequential(ConcatTable(output_gate, Sequential(SelectTable(4), Tanh())), CMulTable())
    stage2 = ConcatTable(hidden, SelectTable(4))
    return Sequential(stage1, stage2)


class LSTM(AbstractRecurrent):
    """LSTM layer; ``forward`` takes one batch x input_size step, returns batch x output_size."""

    def __init__(self, input_size: int, output_size: int, rho=None, fused: bool = True, rng=None):
        super().__init__(rho)
        for name, v in (("input_size", input_size), ("output_size", output_size)):
            if not isinstance(v, (int, np.integer)) or v <= 0:
                raise ConfigError(f"LSTM {name} must be a positive integer, got {v!r}")
        self.input_size = int(input_size)
        self.output_size = int(output_size)
        self.fused = bool(fused)
        rng = make_rng(rng)
        H, I = self.output_size, self.input_size
        bx, bh = 1.0 / math.sqrt(I), 1.0 / math.sqrt(H)
        self._add_param("weight_x", fill_uniform((4 * H, I), -bx, bx, rng))
        self._add_param("weight_h", fill_uniform((4 * H, H), -bh, bh, rng))
        self._add_param("bias", fill_uniform((4 * H,), -bx, bx, rng))
        self._add_param("peephole", fill_uniform((3, H), -bh, bh, rng))
        self.cell = LSTMCell(self) if fused else lstm_cell_composite(self)

    def gate_block(self, name: str, gate: str) -> np.ndarray:
        """View of one gate's slice of a packed parameter (``name`` in params)."""
        H = self.output_size
        if name == "peephole":
            return self.params[name][PEEPHOLES.index(gate)]
        k = GATES.index(gate)
        return self.params[name][k * H:(k + 1) * H]

    def _template(self, t):
        return self.cell

    def _templates(self):
        return [self.cell]

    def _initial_state(self, x):
        zeros = np.zeros((x.shape[0], self.output_size))
        return [zeros, zeros.copy()]

    def _step_input(self, x, prev_state, t):
        if x.ndim != 2 or x.shape[1] != self.input_size:
            raise self._shape_error(f"expected batch x {self.input_size} input, got shape {x.shape}")
        return [x, prev_state[0], prev_state[1]]

    def _split_output(self, out, t):
        return out[0], out

    def _step_grad_output(self, grad_visible, grad_state, st, t):
        if grad_state is None:
            return [grad_visible, np.zeros_like(st.output[1])]
        return [grad_visible + grad_state[0], grad_state[1]]

    def _split_grad_input(self, grad_in, t):
        return grad_in[0], [grad_in[1], grad_in[2]]

    def config(self):
        return {"input_size": self.input_size, "output_size": self.output_size,
                "rho": self.rho, "fused": self.fused}
