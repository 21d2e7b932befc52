"""The Otto cycle state machine: A' B B' C C' D D' A.

One cycle: couple hot (A->A'), hot isochore (A'->B), decouple (B->B'),
sudden stroke h->c (B'->C), couple cold (C->C'), cold isochore (C'->D),
decouple (D->D'), sudden stroke c->h (D'->A).  The strokes are zero
duration and the two TLS Hamiltonians commute, so the density matrix is
unchanged along them and only bookkeeping moves.  The cycle map is
iterated from a thermal product seed until the point-A state repeats.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import model, propagate, qops
from .generators import Generator, SegmentSpec, isochore_generator, segment_generator
from .model import EngineConfig
from .propagate import ExpmPropagator, IntegratorSettings

CYCLE_POINTS = ("A", "A'", "B", "B'", "C", "C'", "D", "D'")


class ConvergenceError(RuntimeError):
    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history or []


@dataclass
class CycleState:
    label: str
    rho: np.ndarray
    phase: str  # current TLS phase, "h" or "c"
    coupling: frozenset  # which reservoirs are currently coupled

    def __post_init__(self):
        if self.label not in CYCLE_POINTS:
            raise ValueError(f"unknown cycle point {self.label!r}")


@dataclass
class CycleMetrics:
    W_out: float
    Q: float
    eta: float  # NaN when Q <= 0 (engine not in the heat-absorbing regime)
    P: float
    C_h: float
    C_c: float
    W_hot_adiabat: float
    W_cold_adiabat: float
    pop_diff_B: float
    pop_diff_D: float
    coherence_B: float
    coherence_D: float
    n_cycles: int
    residual: float
    # diagnostics beyond the serialized record
    W_eq_printed: float = 0.0  # the work expression as printed; W_out = -W_eq_printed
    first_law_residual: float = 0.0
    monotone_convergence: bool = True

    FIELDS = (
        "W_out", "Q", "eta", "P", "C_h", "C_c", "W_hot_adiabat", "W_cold_adiabat",
        "pop_diff_B", "pop_diff_D", "coherence_B", "coherence_D", "n_cycles", "residual",
    )

    def to_dict(self) -> dict:
        out = {}
        for name in self.FIELDS:
            value = getattr(self, name)
            if isinstance(value, float) and math.isnan(value):
                value = None
            out[name] = value
        return out


def _attach_factor(reduced: np.ndarray, factor: np.ndarray, dims: tuple, slot: int) -> np.ndarray:
    """Tensor a factor-local state back into `slot`, keeping the factor order."""
    red_dims = tuple(d for i, d in enumerate(dims) if i != slot)
    d_red = int(np.prod(red_dims))
    t = np.einsum(
        "ab,cd->acbd",
        reduced.reshape(d_red, d_red),
        factor,
    ).reshape(*red_dims, dims[slot], *red_dims, dims[slot])
    n = len(dims)
    # currently ordered (other factors..., slot); permute slot into place
    order = list(range(n - 1))
    order.insert(slot, n - 1)
    perm = order + [i + n for i in order]
    total = int(np.prod(dims))
    return t.transpose(perm).reshape(total, total)


class Engine:
    """Precomputed operators, generators and propagators for one configuration."""

    def __init__(self, config: EngineConfig):
        self.config = config
        self.layout = config.layout
        self.dims = self.layout.dims
        self.rc = {r: config.rc_params(r) for r in ("h", "c")}
        self.beta = {r: config.temps.beta(r) for r in ("h", "c")}
        self.N = {r: model.bose_occupation(self.beta[r], self.rc[r].Omega) for r in ("h", "c")}
        layout = self.layout

        self.H_S = {p: model.build_H_S(config.tls, p, layout) for p in ("h", "c")}
        self.H_I = {r: model.build_H_I(self.rc[r], r, layout) for r in ("h", "c")}
        self.n_op = {}
        for r in ("h", "c"):
            a, ad = qops.build_ladder(layout, r)
            self.n_op[r] = ad @ a
        self.H_rc_self = sum(self.rc[r].Omega * self.n_op[r] for r in ("h", "c"))
        # hot-side Hamiltonian entering the heat definition (no cold RC self-energy)
        self.H_heat = (
            self.H_S["h"] + self.rc["h"].Omega * self.n_op["h"] + self.H_I["h"]
        )
        self.thermal_rc = {
            r: model.thermal_rc_state(self.rc[r], self.beta[r], config.rc_levels)
            for r in ("h", "c")
        }

        dephase = config.mode == "incoherent"
        projective = config.reset_policy == "projective"
        self.generators = {}
        self.seg_frames = {}
        for j in ("h", "c"):
            spec = SegmentSpec(reservoir=j, rethermalize=not projective, dephase=dephase)
            if projective:
                self.generators[j] = self._reduced_generator(j, dephase)
            else:
                self.generators[j] = segment_generator(spec, self.config)
            H_full = model.build_H_Sprime(
                config.tls, self.rc["h"], self.rc["c"], j, {j}, layout
            )
            self.seg_frames[j] = qops.eigh(H_full)

        prop_dim = 2 * config.rc_levels if projective else layout.total_dim
        mode = config.propagator
        if mode == "auto":
            mode = "expm" if prop_dim <= config.numerics.expm_dim_cap else "rk"
        if mode == "expm" and prop_dim > 4 * config.numerics.expm_dim_cap:
            raise ValueError(
                f"expm propagator requested at dimension {prop_dim}; "
                "superoperator would be prohibitively large"
            )
        self.prop_mode = mode
        self._expm = {}
        if mode == "expm" and not config.saturated:
            for j in ("h", "c"):
                self._expm[j] = ExpmPropagator(self.generators[j])
        num = config.numerics
        self.settings = IntegratorSettings(
            rel_tol=num.rel_tol,
            abs_tol=num.abs_tol,
            hermitize_every=num.hermitize_every,
            positivity_floor=num.positivity_floor,
        )

    # --- construction helpers --------------------------------------------

    def _reduced_generator(self, j: str, dephase: bool) -> Generator:
        """Isochore generator on the (TLS, RC_j) subspace for projective resets."""
        cfg = self.config
        dims = (2, cfg.rc_levels)
        a = qops.embed(qops.lowering(cfg.rc_levels), dims, 1)
        sz = qops.embed(qops.pauli("z"), dims, 0)
        H = (
            qops.embed(model.build_H_S(cfg.tls, j), dims, 0)
            + self.rc[j].Omega * (a.conj().T @ a)
            - self.rc[j].lam * sz @ (a + a.conj().T)
        )
        return isochore_generator(
            H,
            a + a.conj().T,
            beta=self.beta[j],
            gamma=self.rc[j].gamma,
            retherm=None,
            gamma_dep=cfg.gamma_dep if dephase else None,
        )

    def seed_state(self) -> CycleState:
        """Thermal product seed at point A (hot phase, everything decoupled)."""
        cfg = self.config
        rho_tls = model.thermal_state(model.build_H_S(cfg.tls, "h"), self.beta["h"])
        rho = np.kron(np.kron(rho_tls, self.thermal_rc["h"]), self.thermal_rc["c"])
        return CycleState(label="A", rho=rho, phase="h", coupling=frozenset())

    # --- cycle segments ---------------------------------------------------

    def _propagate_full(self, rho: np.ndarray, j: str) -> np.ndarray:
        G = self.generators[j]
        cfg = self.config
        if cfg.saturated:
            rho_ss, _ = propagate.stationary_state(
                G, seed=rho, tol=cfg.numerics.stationary_tol
            )
            return rho_ss
        if self.prop_mode == "expm":
            return self._expm[j].propagate(rho, cfg.tau_i)
        return propagate.evolve(rho, G, cfg.tau_i, self.settings)

    def _run_isochore_rho(self, rho: np.ndarray, j: str) -> np.ndarray:
        if self.config.reset_policy == "projective":
            slot_other = self.layout.reservoir_slot("c" if j == "h" else "h")
            keep = [k for k in range(3) if k != slot_other]
            reduced = qops.partial_trace(rho, self.dims, keep)
            evolved = self._propagate_full(reduced, j)
            other = "c" if j == "h" else "h"
            return _attach_factor(evolved, self.thermal_rc[other], self.dims, slot_other)
        return self._propagate_full(rho, j)

    def run_isochore(self, state: CycleState, records: list | None = None) -> CycleState:
        entry = {"A'": ("h", "B"), "C'": ("c", "D")}
        if state.label not in entry:
            raise ValueError(f"isochore cannot start at {state.label}")
        j, out_label = entry[state.label]
        if j not in state.coupling:
            raise ValueError(f"reservoir {j} must be coupled at {state.label}")
        rho1 = self._run_isochore_rho(state.rho, j)
        if records is not None:
            H_tot = self.H_S[j] + self.H_rc_self + self.H_I[j]
            records.append(
                (f"isochore_{j}", float(np.trace(H_tot @ (rho1 - state.rho)).real))
            )
        return CycleState(label=out_label, rho=rho1, phase=j, coupling=state.coupling)

    def quench_coupling(
        self, state: CycleState, reservoir: str, direction: str, records: list | None = None
    ) -> tuple:
        """Instantaneous coupling switch; returns (new state, recorded energy cost)."""
        transitions = {
            ("A", "h", "on"): "A'",
            ("B", "h", "off"): "B'",
            ("C", "c", "on"): "C'",
            ("D", "c", "off"): "D'",
        }
        key = (state.label, reservoir, direction)
        if key not in transitions:
            raise ValueError(f"invalid quench {key} from point {state.label}")
        sign = 1.0 if direction == "on" else -1.0
        cost = sign * float(np.trace(self.H_I[reservoir] @ state.rho).real)
        coupling = (
            state.coupling | {reservoir} if direction == "on" else state.coupling - {reservoir}
        )
        if records is not None:
            records.append((f"quench_{direction}_{reservoir}", cost))
        new = CycleState(
            label=transitions[key], rho=state.rho, phase=state.phase,
            coupling=frozenset(coupling),
        )
        return new, cost

    def run_stroke(self, state: CycleState, records: list | None = None) -> CycleState:
        """Sudden commuting stroke; rho unchanged, TLS phase flips, work recorded."""
        if state.label not in ("B'", "D'"):
            raise ValueError(f"stroke cannot start at {state.label}")
        if state.coupling:
            raise ValueError("both couplings must be off during a stroke")
        new_phase = "c" if state.phase == "h" else "h"
        dE = float(np.trace((self.H_S[new_phase] - self.H_S[state.phase]) @ state.rho).real)
        if records is not None:
            records.append((f"stroke_{state.phase}_to_{new_phase}", dE))
        out_label = "C" if state.label == "B'" else "A"
        return CycleState(
            label=out_label, rho=state.rho, phase=new_phase, coupling=state.coupling
        )

    def run_cycle(self, state_A: CycleState, records: list | None = None) -> tuple:
        """One full cycle from point A; returns (new A state, states at A..D)."""
        states = {"A": state_A}
        s, _ = self.quench_coupling(state_A, "h", "on", records)
        s = self.run_isochore(s, records)
        states["B"] = s
        s, _ = self.quench_coupling(s, "h", "off", records)
        s = self.run_stroke(s, records)
        states["C"] = s
        s, _ = self.quench_coupling(s, "c", "on", records)
        s = self.run_isochore(s, records)
        states["D"] = s
        s, _ = self.quench_coupling(s, "c", "off", records)
        s = self.run_stroke(s, records)
        return s, states

    # --- limit cycle ------------------------------------------------------

    def find_limit_cycle(self) -> tuple:
        """Iterate the cycle map until the point-A state repeats.

        Returns (state_A, states_dict, diagnostics).
        """
        cfg = self.config
        tol = cfg.numerics.limit_cycle_tol
        cap = 2 if cfg.saturated else cfg.numerics.max_cycles
        state = self.seed_state()
        history = []
        for n in range(1, cap + 1):
            new_state, states = self.run_cycle(state)
            residual = qops.trace_distance(new_state.rho, state.rho)
            history.append(residual)
            state = new_state
            if residual <= tol or (cfg.saturated and n >= 2):
                monotone = all(
                    history[i + 1] <= history[i] * (1 + 1e-9)
                    for i in range(5, len(history) - 1)
                )
                if not monotone:
                    warnings.warn("limit-cycle residuals not monotone after 5 iterations")
                records: list = []
                state, states = self.run_cycle(state, records)
                self._check_rethermalization(states)
                diag = {
                    "n_cycles": n,
                    "residual": residual,
                    "history": history,
                    "monotone": monotone,
                    "records": records,
                }
                return state, states, diag
        raise ConvergenceError(
            f"limit cycle not reached in {cap} iterations "
            f"(last residual {history[-1]:.3e} > {tol:.1e})",
            history,
        )

    def _check_rethermalization(self, states: dict):
        """The uncoupled RC must be thermal again at each recoupling instant."""
        if self.config.reset_policy == "projective" or self.config.saturated:
            return
        for point, reservoir in (("A", "h"), ("B", "c")):
            slot = self.layout.reservoir_slot(reservoir)
            reduced = qops.partial_trace(states[point].rho, self.dims, [slot])
            dist = qops.trace_distance(reduced, self.thermal_rc[reservoir])
            if dist > 1e-6:
                gd = self.config.resolved_gamma_d()
                warnings.warn(
                    f"RC_{reservoir} not rethermalized at recoupling "
                    f"(trace distance {dist:.2e}); raise gamma_d above {gd:g} "
                    f"or extend tau_i"
                )

    # --- metrics ----------------------------------------------------------

    def compute_metrics(self, states: dict, diag: dict) -> CycleMetrics:
        cfg = self.config
        rho = {p: states[p].rho for p in ("A", "B", "C", "D")}

        def ev(op, p):
            return float(np.trace(op @ rho[p]).real)

        C_h = -ev(self.H_I["h"], "B")
        C_c = -ev(self.H_I["c"], "D")
        # Per-stroke works are the hot-minus-cold Hamiltonian expectations at the
        # stroke points, so that W_out = W_hot - W_cold - C_h - C_c directly.
        W_hot = ev(self.H_S["h"], "B") - ev(self.H_S["c"], "B")
        W_cold = ev(self.H_S["h"], "D") - ev(self.H_S["c"], "D")
        W_out = W_hot - W_cold - C_h - C_c
        W_eq_printed = -W_out
        Q = ev(self.H_heat, "B") - ev(self.H_heat, "A")
        eta = W_out / Q if Q > 0 else float("nan")
        P = 0.0 if cfg.saturated else W_out / (2.0 * cfg.tau_i)

        pop = {}
        for p, phase in (("B", "h"), ("D", "c")):
            tls = qops.partial_trace(rho[p], self.dims, [qops.SLOT_TLS])
            es = qops.eigh(model.build_H_S(cfg.tls, phase))
            probs = np.real(np.diag(es.to_eigen(tls)))
            pop[p] = float(probs[0] - probs[1])  # p_ground - p_excited

        coh = {}
        for p, j in (("B", "h"), ("D", "c")):
            coh[p] = qops.l1_coherence(rho[p], self.seg_frames[j].vectors)

        records = diag.get("records", [])
        first_law = float(sum(v for _, v in records)) if records else 0.0

        return CycleMetrics(
            W_out=W_out,
            Q=Q,
            eta=eta,
            P=P,
            C_h=C_h,
            C_c=C_c,
            W_hot_adiabat=W_hot,
            W_cold_adiabat=W_cold,
            pop_diff_B=pop["B"],
            pop_diff_D=pop["D"],
            coherence_B=coh["B"],
            coherence_D=coh["D"],
            n_cycles=diag["n_cycles"],
            residual=diag["residual"],
            W_eq_printed=W_eq_printed,
            first_law_residual=first_law,
            monotone_convergence=diag["monotone"],
        )


def run_engine(config: EngineConfig, return_states: bool = False):
    """Find the limit cycle and evaluate every thermodynamic metric on it."""
    eng = Engine(config)
    _, states, diag = eng.find_limit_cycle()
    metrics = eng.compute_metrics(states, diag)
    if return_states:
        return metrics, states
    return metrics


# module-level spec surface (each builds a one-shot Engine)


def find_limit_cycle(config: EngineConfig) -> tuple:
    eng = Engine(config)
    state, states, diag = eng.find_limit_cycle()
    return state, (diag["n_cycles"], diag["residual"])


def compute_metrics(config: EngineConfig) -> CycleMetrics:
    return run_engine(config)
