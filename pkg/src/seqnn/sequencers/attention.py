from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..nn.module import Module
from ..rnn.abstract import set_online
from .. import table as T
from .sequencer import AbstractSequencer, as_recurrent


class RecurrentAttention(AbstractSequencer):
    """Recurrent attention over one fixed input.

    At step t the action module maps the previous rnn output h_{t-1} (zeros at
    t = 1) to an action z_t, and the rnn consumes the table {x, z_t}. The output
    is {h_1..h_nStep}; actions stay internal. Both rnn and action are wrapped in
    a Recursor when they are not already recurrent.
    """

    def __init__(self, rnn: Module, action: Module, n_step: int, hidden_size: int):
        super().__init__(rnn)
        if not isinstance(n_step, int) or n_step < 1:
            raise ConfigError(f"RecurrentAttention n_step must be >= 1, got {n_step!r}")
        declared = getattr(self.module, "output_size", None) or getattr(self.module, "start_size", None)
        if declared is not None and declared != hidden_size:
            raise ConfigError(f"RecurrentAttention: hidden_size {hidden_size} != rnn output size {declared}")
        self.action = as_recurrent(action)
        set_online(self.action)
        self.n_step = n_step
        self.hidden_size = int(hidden_size)

    @property
    def rnn(self):
        return self.module

    def children(self):
        return [self.module, self.action]

    def update_output(self, input):
        self.module.forget()
        self.action.forget()
        batch = T.first_leaf(input).shape[0]
        self._prev, self._actions = [], []
        outputs = []
        prev = np.zeros((batch, self.hidden_size))
        for _ in range(self.n_step):
            z = self.action.forward(prev)
            h = self.module.forward([input, z])
            self._prev.append(prev)
            self._actions.append(z)
            outputs.append(h)
            prev = h
        return outputs

    def backward(self, input, grad_output):
        self._check_forwarded()
        grad_x, carry = None, None
        for t in reversed(range(self.n_step)):
            g_h = T.add(grad_output[t], carry)
            gx, gz = self.module.backward([input, self._actions[t]], g_h)
            grad_x = T.add(grad_x, gx)
            g_prev = self.action.backward(self._prev[t], gz)
            # the zero initial "previous output" is a constant
            carry = g_prev if t > 0 else None
        self.grad_input = grad_x
        return grad_x

    def config(self):
        return {"n_step": self.n_step, "hidden_size": self.hidden_size}

    @classmethod
    def from_config(cls, config, children):
        return cls(children[0], children[1], **config)


class GlimpseCrop(Module):
    """Fixed (non-learned) glimpse sensor: {image, location} -> flattened patch.

    ``image`` is batch x S x S; ``location`` is batch x 2 (row, col) in [-1, 1],
    mapped to a pixel centre and clamped. Pixels outside the image read as zero.
    The crop is piecewise constant in the location, so its location gradient is
    zero.
    """

    def __init__(self, image_size: int, patch_size: int):
        super().__init__()
        if image_size < 1 or patch_size < 1:
            raise ConfigError("GlimpseCrop sizes must be positive")
        self.image_size = int(image_size)
        self.patch_size = int(patch_size)

    def _corners(self, loc):
        centre = np.rint((np.clip(loc, -1.0, 1.0) + 1.0) / 2.0 * (self.image_size - 1)).astype(int)
        # top-left corner in padded coordinates (padding = patch_size)
        return centre - self.patch_size // 2 + self.patch_size

    def update_output(self, input):
        img, loc = input
        if img.ndim != 3 or img.shape[1:] != (self.image_size, self.image_size):
            raise self._shape_error(f"expected batch x {self.image_size} x {self.image_size} image, got {img.shape}")
        p = self.patch_size
        padded = np.pad(img, ((0, 0), (p, p), (p, p)))
        corners = self._corners(loc)
        out = np.empty((img.shape[0], p * p))
        for b, (r, c) in enumerate(corners):
            out[b] = padded[b, r:r + p, c:c + p].reshape(-1)
        return out

    def update_grad_input(self, input, grad_output):
        img, loc = input
        p = self.patch_size
        padded = np.zeros((img.shape[0], img.shape[1] + 2 * p, img.shape[2] + 2 * p))
        for b, (r, c) in enumerate(self._corners(loc)):
            padded[b, r:r + p, c:c + p] += grad_output[b].reshape(p, p)
        return [padded[:, p:-p, p:-p].copy(), np.zeros_like(loc)]

    def config(self):
        return {"image_size": self.image_size, "patch_size": self.patch_size}
