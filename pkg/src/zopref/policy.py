"""Per-agent tabular softmax policies over local states."""

from __future__ import annotations

import json
from bisect import bisect_right

import numpy as np

FORMAT_TAG = "tabular-policy/1"


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction."""
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class TabularPolicy:
    """One softmax table per agent; parameters are the raw logits.

    The flat parameter layout concatenates agents in order, each table
    row-major (state major, action minor). All mutating-style operations
    return new policies; instances are treated as frozen once sampled from.
    """

    def __init__(self, logits: list[np.ndarray]):
        self.logits = [np.array(t, dtype=float) for t in logits]
        for t in self.logits:
            if t.ndim != 2:
                raise ValueError("each agent table must be 2-d (states x actions)")
        self.n_agents = len(self.logits)
        self.dims = [t.size for t in self.logits]
        self.offsets = np.concatenate([[0], np.cumsum(self.dims)]).astype(int)
        self.dim_total = int(self.offsets[-1])
        self._probs: list[np.ndarray] | None = None
        self._cum: list[list[tuple[float, ...]]] | None = None

    @classmethod
    def zeros(cls, state_sizes, action_sizes) -> "TabularPolicy":
        return cls([np.zeros((s, a)) for s, a in zip(state_sizes, action_sizes)])

    @classmethod
    def for_mdp(cls, mdp) -> "TabularPolicy":
        return cls.zeros(mdp.state_sizes, mdp.action_sizes)

    def probs(self, i: int) -> np.ndarray:
        if self._probs is None:
            self._probs = [softmax_rows(t) for t in self.logits]
        return self._probs[i]

    def action_probs(self, i: int, s_i: int) -> np.ndarray:
        return self.probs(i)[s_i]

    def _cum_tables(self):
        if self._cum is None:
            self._cum = [
                [tuple(np.cumsum(row)) for row in self.probs(i)]
                for i in range(self.n_agents)
            ]
        return self._cum

    def sample_joint_action(self, state, rng: np.random.Generator) -> tuple[int, ...]:
        """Draw each agent's action from its local row; one uniform per agent."""
        cum = self._cum_tables()
        out = []
        for i in range(self.n_agents):
            row = cum[i][state[i]]
            u = rng.random()
            a = bisect_right(row, u)
            if a >= len(row):
                a = len(row) - 1
            out.append(a)
        return tuple(out)

    def score(self, i: int, s_i: int, a_i: int) -> np.ndarray:
        """Gradient of log pi_i(a_i | s_i) in agent i's flat parameters.

        Nonzero only on row s_i: indicator(a_i) minus the row probabilities.
        """
        n_s, n_a = self.logits[i].shape
        g = np.zeros(n_s * n_a)
        row = -self.probs(i)[s_i].copy()
        row[a_i] += 1.0
        g[s_i * n_a:(s_i + 1) * n_a] = row
        return g

    def max_score_norm(self) -> float:
        """max over (agent, state, action) of ||score||; always <= sqrt(2)."""
        worst = 0.0
        for i in range(self.n_agents):
            p = self.probs(i)
            ssq = (p * p).sum(axis=1)
            # ||e_a - p||^2 = 1 - 2 p_a + sum_b p_b^2, largest at the least likely action
            m = 1.0 - 2.0 * p.min(axis=1) + ssq
            worst = max(worst, float(np.sqrt(m.max())))
        return worst

    # -- parameter-space operations -----------------------------------------

    def split(self, flat: np.ndarray) -> list[np.ndarray]:
        """Cut a flat d_total vector into per-agent blocks (views)."""
        flat = np.asarray(flat)
        if flat.shape != (self.dim_total,):
            raise ValueError(f"expected flat vector of length {self.dim_total}")
        return [flat[self.offsets[i]:self.offsets[i + 1]] for i in range(self.n_agents)]

    def add(self, flat: np.ndarray, scale: float = 1.0) -> "TabularPolicy":
        blocks = self.split(flat)
        return TabularPolicy(
            [t + scale * b.reshape(t.shape) for t, b in zip(self.logits, blocks)]
        )

    def perturb(self, direction: np.ndarray, mu: float) -> "TabularPolicy":
        """theta + mu * direction, direction given flat."""
        return self.add(direction, mu)

    # -- serialization -------------------------------------------------------

    def save(self, path):
        payload = {
            "format": FORMAT_TAG,
            "agents": [
                {"states": t.shape[0], "actions": t.shape[1], "logits": t.tolist()}
                for t in self.logits
            ],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "TabularPolicy":
        with open(path) as fh:
            payload = json.load(fh)
        if payload.get("format") != FORMAT_TAG:
            raise ValueError(f"unrecognized policy file format: {payload.get('format')!r}")
        tables = []
        for rec in payload["agents"]:
            t = np.array(rec["logits"], dtype=float)
            if t.shape != (rec["states"], rec["actions"]):
                raise ValueError("policy file shape mismatch")
            tables.append(t)
        return cls(tables)
