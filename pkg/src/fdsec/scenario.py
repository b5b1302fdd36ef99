"""System configuration and Monte Carlo channel generation.

One full-duplex base station with N_T antennas serves K downlink and J
uplink single-antenna users; M potential eavesdroppers carry N_R antennas
each.  Users and eavesdroppers are dropped uniformly in distance within an
annulus around the BS, large-scale attenuation follows a log-distance law
anchored at free-space loss for the reference distance, small-scale fading
is Rayleigh (Rician for the self-interference loop), and imperfect CSI is
modeled by errors drawn uniformly in norm balls whose radii are a fixed
fraction of each true channel norm.
"""

import dataclasses
import io
import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


# -- unit helpers -------------------------------------------------------------


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def dbm_to_watt(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def watt_to_dbm(w):
    return 10.0 * np.log10(w) + 30.0


# -- configuration ------------------------------------------------------------

_INT_FIELDS = {"K", "J", "M", "N_T", "N_R"}


@dataclass
class SystemConfig:
    """Scenario parameters; defaults reproduce the reference large-scale setup."""

    K: int = 3
    J: int = 7
    M: int = 2
    N_T: int = 10
    N_R: int = 2
    gamma_dl_req_db: float = 10.0
    gamma_ul_req_db: float = 5.0
    r_tol_dl: float = 1.0
    r_tol_ul: float = 1.0
    rho_db: float = -80.0
    sigma_dl_dbm: float = -100.0
    sigma_ul_dbm: float = -110.0
    sigma_eve_dbm: float = -100.0
    antenna_gain_dbi: float = 10.0
    kappa_est_sq: float = 0.05
    path_loss_exponent: float = 3.6
    ref_distance_m: float = 30.0
    max_distance_m: float = 600.0
    carrier_hz: float = 1.9e9
    bandwidth_hz: float = 200e3
    rician_factor_db: float = 5.0

    def __post_init__(self):
        if min(self.K, self.J, self.M) < 0 or self.N_T < 1 or self.N_R < 1:
            raise ValueError("dimensions must be non-negative (N_T, N_R >= 1)")
        if self.kappa_est_sq < 0:
            raise ValueError("kappa_est_sq must be >= 0")
        if not (0 < self.ref_distance_m <= self.max_distance_m):
            raise ValueError("need 0 < ref_distance_m <= max_distance_m")

    # derived linear-scale quantities
    @property
    def gamma_dl_req(self):
        return float(db_to_linear(self.gamma_dl_req_db))

    @property
    def gamma_ul_req(self):
        return float(db_to_linear(self.gamma_ul_req_db))

    @property
    def rho(self):
        return float(db_to_linear(self.rho_db))

    @property
    def sigma_dl_w(self):
        return float(dbm_to_watt(self.sigma_dl_dbm))

    @property
    def sigma_ul_w(self):
        return float(dbm_to_watt(self.sigma_ul_dbm))

    @property
    def sigma_eve_w(self):
        return float(dbm_to_watt(self.sigma_eve_dbm))

    @property
    def xi_dl(self):
        return 2.0 ** self.r_tol_dl - 1.0

    @property
    def xi_ul(self):
        return 2.0 ** self.r_tol_ul - 1.0

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def desk_scale(cls, **kw):
        """Small instance used by the test harness and the acceptance suite."""
        base = dict(K=2, J=3, M=1, N_T=6, N_R=2)
        base.update(kw)
        return cls(**base)

    @classmethod
    def from_text(cls, text):
        vals = {}
        for lineno, raw in enumerate(io.StringIO(text), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            fields = {f.name for f in dataclasses.fields(cls)}
            if key not in fields:
                raise ValueError(f"config line {lineno}: unknown key {key!r}")
            vals[key] = int(val) if key in _INT_FIELDS else float(val)
        return cls(**vals)

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            return cls.from_text(fh.read())

    def to_text(self):
        lines = [f"{f.name} = {getattr(self, f.name)}" for f in dataclasses.fields(self)]
        return "\n".join(lines) + "\n"

    def to_file(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_text())


# -- large-scale propagation ---------------------------------------------------


def fspl_db(distance_m, carrier_hz):
    """Free-space path loss 20 log10(4 pi d f / c)."""
    return 20.0 * np.log10(4.0 * math.pi * distance_m * carrier_hz / SPEED_OF_LIGHT)


def path_loss_db(distance_m, config):
    """Log-distance law anchored at free-space loss for the reference distance."""
    d = np.maximum(np.asarray(distance_m, dtype=float), config.ref_distance_m)
    anchor = fspl_db(config.ref_distance_m, config.carrier_hz)
    return anchor + 10.0 * config.path_loss_exponent * np.log10(d / config.ref_distance_m)


def link_amplitude(distance_m, config, bs_side):
    """sqrt of the linear link gain; BS antenna gain applies to BS-side links only."""
    gain_db = -path_loss_db(distance_m, config)
    if bs_side:
        gain_db = gain_db + config.antenna_gain_dbi
    return np.sqrt(db_to_linear(gain_db))


# -- channel realization --------------------------------------------------------


@dataclass
class ChannelRealization:
    """One drop: true channels, their estimates, and the uncertainty radii.

    Shapes: h (K, N_T); g (J, N_T); f (J, K); L (M, N_T, N_R);
    e (M, J, N_R); h_si (N_T, N_T).  eps_cci[k]^2 aggregates the per-link
    CCI radii, sum_j eps_f[j, k]^2, which is the ball the stacked downlink
    interference vector lives in.
    """

    config: SystemConfig
    seed: int
    h: np.ndarray
    g: np.ndarray
    f_true: np.ndarray
    f_hat: np.ndarray
    L_true: np.ndarray
    L_hat: np.ndarray
    e_true: np.ndarray
    e_hat: np.ndarray
    h_si: np.ndarray
    eps_f: np.ndarray
    eps_cci: np.ndarray
    eps_L: np.ndarray
    eps_e: np.ndarray
    dist_dl: np.ndarray
    dist_ul: np.ndarray
    dist_eve: np.ndarray

    @property
    def dims(self):
        c = self.config
        return c.K, c.J, c.M, c.N_T, c.N_R


def _cn(rng, *shape):
    """i.i.d. CN(0, 1) samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def _ball(rng, radius, *shape):
    """Uniform draw from the complex norm ball of the given radius.

    shape describes one sample; the radius may broadcast over leading axes.
    """
    z = _cn(rng, *shape)
    flat = z.reshape(shape[0], -1) if len(shape) > 1 else z.reshape(1, -1)
    dim2 = 2 * flat.shape[-1]
    nrm = np.linalg.norm(flat, axis=-1, keepdims=True)
    nrm[nrm == 0.0] = 1.0
    u = rng.random(flat.shape[0]) ** (1.0 / dim2)
    flat = flat / nrm * u[:, None]
    out = flat.reshape(shape)
    return np.asarray(radius).reshape((-1,) + (1,) * (len(shape) - 1)) * out


def _positions(rng, n, config):
    """Uniform-in-distance drop inside the service annulus; BS at the origin."""
    d = rng.uniform(config.ref_distance_m, config.max_distance_m, size=n)
    phi = rng.uniform(0.0, 2.0 * math.pi, size=n)
    return d, np.stack([d * np.cos(phi), d * np.sin(phi)], axis=-1)


def generate_drop(config, seed):
    """Generate one channel realization, bitwise-deterministic in (config, seed).

    Independent child streams are used per channel group so that changing,
    say, M does not perturb the downlink or uplink draws.
    """
    ss = np.random.SeedSequence(int(seed))
    streams = [np.random.Generator(np.random.PCG64(c)) for c in ss.spawn(12)]
    (rng_pos_dl, rng_pos_ul, rng_pos_ev, rng_h, rng_g, rng_f,
     rng_L, rng_e, rng_si, rng_err_f, rng_err_L, rng_err_e) = streams

    K, J, M, NT, NR = config.K, config.J, config.M, config.N_T, config.N_R

    dist_dl, pos_dl = _positions(rng_pos_dl, K, config)
    dist_ul, pos_ul = _positions(rng_pos_ul, J, config)
    dist_ev, pos_ev = _positions(rng_pos_ev, M, config)

    h = link_amplitude(dist_dl, config, bs_side=True)[:, None] * _cn(rng_h, K, NT)
    g = link_amplitude(dist_ul, config, bs_side=True)[:, None] * _cn(rng_g, J, NT)

    # uplink-user -> downlink-user co-channel interference, no BS gain
    if J and K:
        d_cci = np.linalg.norm(pos_ul[:, None, :] - pos_dl[None, :, :], axis=-1)
        f_true = link_amplitude(d_cci, config, bs_side=False) * _cn(rng_f, J, K)
    else:
        f_true = np.zeros((J, K), dtype=complex)

    L_true = link_amplitude(dist_ev, config, bs_side=True)[:, None, None] * _cn(rng_L, M, NT, NR)

    if M and J:
        d_ue = np.linalg.norm(pos_ev[:, None, :] - pos_ul[None, :, :], axis=-1)
        e_true = link_amplitude(d_ue, config, bs_side=False)[:, :, None] * _cn(rng_e, M, J, NR)
    else:
        e_true = np.zeros((M, J, NR), dtype=complex)

    # residual self-interference loop: unit-power Rician entries, the
    # cancellation constant rho carries the suppression
    k_lin = float(db_to_linear(config.rician_factor_db))
    spec = math.sqrt(k_lin / (1.0 + k_lin))
    h_si = spec + math.sqrt(1.0 / (1.0 + k_lin)) * _cn(rng_si, NT, NT)

    kappa = math.sqrt(config.kappa_est_sq)
    eps_f = kappa * np.abs(f_true)
    eps_L = kappa * np.linalg.norm(L_true.reshape(M, -1), axis=-1) if M else np.zeros(0)
    eps_e = kappa * np.linalg.norm(e_true, axis=-1) if M and J else np.zeros((M, J))

    if J and K:
        err_f = _ball(rng_err_f, eps_f.reshape(-1), J * K, 1).reshape(J, K)
    else:
        err_f = np.zeros((J, K), dtype=complex)
    if M:
        err_L = _ball(rng_err_L, eps_L, M, NT, NR)
    else:
        err_L = np.zeros((M, NT, NR), dtype=complex)
    if M and J:
        err_e = _ball(rng_err_e, eps_e.reshape(-1), M * J, NR).reshape(M, J, NR)
    else:
        err_e = np.zeros((M, J, NR), dtype=complex)

    return ChannelRealization(
        config=config,
        seed=int(seed),
        h=h,
        g=g,
        f_true=f_true,
        f_hat=f_true - err_f,
        L_true=L_true,
        L_hat=L_true - err_L,
        e_true=e_true,
        e_hat=e_true - err_e,
        h_si=h_si,
        eps_f=eps_f,
        eps_cci=np.sqrt(np.sum(eps_f**2, axis=0)) if K else np.zeros(0),
        eps_L=eps_L,
        eps_e=eps_e,
        dist_dl=dist_dl,
        dist_ul=dist_ul,
        dist_eve=dist_ev,
    )
