"""Joint MCMC learner for spatial concepts, reference objects and words.

Each scene contributes a trainer position (expressed relative to every
candidate reference object) and a segmented word sequence.  The sampler
alternates over: concept assignments under a Chinese restaurant prior
(auxiliary-parameter scheme with fresh prior draws), reference object
choices, word slot positions, and the continuous parameters.  A variant
with a second word slot ties object category words into the same joint
model, which sharpens the reference choice.

Everything is flat numpy per scene; object counts and vocabularies stay
small, so sweeps are cheap even though scenes are visited in a Python
loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .distributions import (
    Hyperparams,
    LOG_TWO_PI,
    VonMises,
    gamma_logpdf,
    log_i0,
    lognormal_logpdf,
    normal_logpdf,
    vm_sample,
)
from .geometry import frame_for, to_relative

N_AUX = 3  # auxiliary parameter draws per concept-assignment step
KAPPA_STEP = 0.1  # random-walk scale on log kappa
TINY = np.finfo(float).tiny


@dataclass
class SceneObs:
    """One scene reduced to the arrays the sampler needs."""

    l: np.ndarray
    theta: np.ndarray
    words: np.ndarray
    cats: np.ndarray | None = None


@dataclass
class LearnData:
    scenes: list
    vocab: list
    vocab_index: dict
    log_unigram: np.ndarray
    n_categories: int = 0

    @property
    def n_scenes(self) -> int:
        return len(self.scenes)


def build_learn_data(scenes, segmentations, n_categories: int = 0) -> LearnData:
    """Pair scenes with one corpus segmentation.

    The vocabulary is the set of word types in the segmentation, in
    first-appearance order; the unigram distribution is their add-one
    smoothed relative frequency, which is what the word likelihood
    divides by.
    """
    if len(scenes) != len(segmentations):
        raise ValueError("one word sequence per scene required")
    vocab: list = []
    vocab_index: dict = {}
    flat = []
    for words in segmentations:
        ids = []
        for w in words:
            w = tuple(w)
            if w not in vocab_index:
                vocab_index[w] = len(vocab)
                vocab.append(w)
            ids.append(vocab_index[w])
        if not ids:
            raise ValueError("every scene needs at least one word")
        flat.append(np.array(ids, dtype=np.int64))
    counts = np.zeros(len(vocab))
    for ids in flat:
        np.add.at(counts, ids, 1.0)
    log_unigram = np.log((counts + 1.0) / (counts.sum() + len(vocab)))
    obs = []
    for scene, ids in zip(scenes, flat):
        rel = [
            to_relative(scene.trainer, frame_for(obj, scene.robot))
            for obj in scene.objects
        ]
        obs.append(
            SceneObs(
                l=np.array([r.l for r in rel]),
                theta=np.array([r.theta for r in rel]),
                words=ids,
                cats=(
                    np.array(scene.categories, dtype=np.int64)
                    if n_categories
                    else None
                ),
            )
        )
    return LearnData(
        scenes=obs,
        vocab=vocab,
        vocab_index=vocab_index,
        log_unigram=log_unigram,
        n_categories=n_categories,
    )


@dataclass
class Snapshot:
    """A copy of the sampler state after one sweep."""

    C: np.ndarray
    pi: np.ndarray
    z: np.ndarray
    nu: np.ndarray
    kappa: np.ndarray
    phi: np.ndarray
    mu: float
    lam: float
    psi: np.ndarray
    log_post: float
    z_o: np.ndarray | None = None
    c_o: np.ndarray | None = None
    phi_o: np.ndarray | None = None
    v_o: np.ndarray | None = None


@dataclass
class PointEstimate:
    """Posterior point estimate used for prediction and evaluation.

    Discrete variables come from the highest-scoring post-burn-in sweep;
    continuous parameters are averaged over the post-burn-in sweeps that
    share that sweep's concept assignment.
    """

    C: np.ndarray
    pi: np.ndarray
    z: np.ndarray
    nu: np.ndarray
    kappa: np.ndarray
    phi: np.ndarray
    mu: float
    lam: float
    psi: np.ndarray
    log_post: float
    n_matching: int
    z_o: np.ndarray | None = None
    c_o: np.ndarray | None = None
    phi_o: np.ndarray | None = None
    v_o: np.ndarray | None = None

    @property
    def n_concepts(self) -> int:
        return len(self.nu)

    def concept_weights(self, alpha: float | None = None) -> np.ndarray:
        """Mixing weights ``n_s / (N + alpha)``; plain fractions if None."""
        counts = np.bincount(self.C, minlength=self.n_concepts).astype(float)
        denom = len(self.C) + (alpha if alpha is not None else 0.0)
        return counts / denom


@dataclass
class ChainResult:
    snapshots: list
    burnin: int
    kappa_accept_rate: float

    def posterior(self) -> list:
        return self.snapshots[self.burnin :]


def location_loglik(obs: SceneObs, pi: int, nu: float, kappa: float,
                    mu: float, lam: float, e: float) -> float:
    """Log likelihood of one scene's geometry given its reference choice.

    The chosen object explains the trainer through the concept; every
    other object must fall inside the uniform background disc.
    """
    log_norm = LOG_TWO_PI + float(log_i0(kappa))
    ref = (
        kappa * math.cos(obs.theta[pi] - nu)
        - log_norm
        + 0.5 * (math.log(lam) - LOG_TWO_PI)
        - 0.5 * lam * (obs.l[pi] - mu) ** 2
    )
    others = np.delete(obs.l, pi)
    if np.any(others > e):
        return -math.inf
    return float(ref - len(others) * (math.log(e) + LOG_TWO_PI))


def word_loglik(word_ids, z: int, phi_row: np.ndarray, psi: np.ndarray,
                log_unigram: np.ndarray, z_o: int = -1,
                phi_o_row: np.ndarray | None = None) -> float:
    """Log likelihood of one scene's words under the rescaled model.

    The slot word comes from the concept's distribution, every other
    word from the shared distribution, and each factor is divided by the
    word's unigram probability.
    """
    word_ids = np.asarray(word_ids)
    logp = float(
        np.sum(np.log(np.maximum(psi[word_ids], TINY)) - log_unigram[word_ids])
    )
    wz = word_ids[z]
    logp += float(
        math.log(max(phi_row[wz], TINY)) - math.log(max(psi[wz], TINY))
    )
    if z_o >= 0:
        if phi_o_row is None:
            raise ValueError("object slot set but no object word distribution")
        wo = word_ids[z_o]
        logp += float(
            math.log(max(phi_o_row[wo], TINY)) - math.log(max(psi[wo], TINY))
        )
    return logp


class ConceptSampler:
    """Gibbs/Metropolis sweeps over the full model state.

    ``frozen`` fixes the continuous parameters and the number of
    concepts and swaps the restaurant prior for a finite symmetric
    Dirichlet over those concepts, which makes the discrete posterior
    exactly enumerable for small scenes; it exists for testing.
    """

    def __init__(
        self,
        data: LearnData,
        h: Hyperparams,
        rng: np.random.Generator,
        with_objects: bool = False,
        frozen: bool = False,
        init_state: Snapshot | None = None,
    ):
        self.data = data
        self.h = h
        self.rng = rng
        self.frozen = frozen
        self.with_objects = with_objects and data.n_categories > 0
        self.V = len(data.vocab)
        self.N = data.n_scenes
        self.kappa_proposed = 0
        self.kappa_accepted = 0
        # data-dependent constants reused by the joint density
        self._n_objects = np.array([len(o.l) for o in data.scenes])
        self._n_words = np.array([len(o.words) for o in data.scenes])
        self._vocab_counts = np.zeros(self.V)
        for o in data.scenes:
            np.add.at(self._vocab_counts, o.words, 1.0)
        self._log_unigram_total = float(
            np.dot(self._vocab_counts, data.log_unigram)
        )
        # the largest "other object" distance per (scene, reference choice)
        jmax = int(self._n_objects.max())
        self._max_other_l = np.full((self.N, jmax), -np.inf)
        for n, o in enumerate(data.scenes):
            self._max_other_l[n, : len(o.l)] = _max_excluding_self(o.l)
        if init_state is not None:
            self._load(init_state)
        else:
            self._init_state()
        self._refresh_caches()

    # ----- state setup -----

    def _init_state(self):
        rng, h, N, V = self.rng, self.h, self.N, self.V
        C = np.zeros(N, dtype=np.int64)
        counts: list = []
        for n in range(N):
            weights = np.array(counts + [h.alpha_r], dtype=float)
            c = _sample_log(np.log(weights), rng)
            if c == len(counts):
                counts.append(0)
            counts[c] += 1
            C[n] = c
        S = len(counts)
        self.C = C
        self.counts = np.array(counts, dtype=np.int64)
        self.nu, self.kappa, self.phi = _draw_concepts(h, V, rng, S)
        self.mu = rng.normal(h.mu0, 1.0 / math.sqrt(h.lambda0))
        self.lam = rng.gamma(h.a0, 1.0 / h.b0)
        g = rng.standard_gamma(np.full(V, h.beta_psi))
        self.psi = g / g.sum()
        # Reference choices start from the distance factor of their
        # conditional; the directional parameters carry no information
        # yet, so leaving them out avoids seeding arbitrary frames.
        self.pi = np.empty(N, dtype=np.int64)
        for n, o in enumerate(self.data.scenes):
            infeasible = np.nonzero(o.l > h.e)[0]
            if len(infeasible) > 1:
                raise RuntimeError(
                    f"scene {n}: {len(infeasible)} objects outside the "
                    "background disc, no reference choice has support"
                )
            if len(infeasible) == 1:
                self.pi[n] = infeasible[0]
            else:
                logw = -0.5 * self.lam * (o.l - self.mu) ** 2
                self.pi[n] = _sample_log(logw, rng)
        self.z = np.array(
            [rng.integers(len(o.words)) for o in self.data.scenes],
            dtype=np.int64,
        )
        if self.with_objects:
            K = self.data.n_categories
            self.z_o = np.full(N, -1, dtype=np.int64)
            # The object word names the chosen reference's category, so
            # word/category co-occurrence across scenes identifies the
            # object words before any sweep runs: every (word, candidate
            # category) pair votes with the candidate's distance factor,
            # and words tied to categories develop peaked rows while
            # location and function words stay flat.  Each scene then
            # starts from its best (reference, object word) pair under
            # the vote table.  A distance-only start loses the clue in
            # the first sweeps and, when candidates are many, settles
            # into a merged state it never leaves.
            exps = []
            votes = np.full((V, K), 0.5)
            for o in self.data.scenes:
                e = -0.5 * self.lam * (o.l - self.mu) ** 2
                exps.append(e)
                dw = np.exp(e - e.max())
                dw /= dw.sum()
                per_cat = np.zeros(K)
                np.add.at(per_cat, o.cats, dw)
                np.add.at(votes, o.words, per_cat[None, :])
            logv = np.log(votes / votes.sum(axis=1, keepdims=True))
            for n, o in enumerate(self.data.scenes):
                L = len(o.words)
                # score[i, j]: slot i names the category of candidate j
                score = logv[o.words][:, o.cats] + exps[n][None, :]
                infeasible = np.nonzero(o.l > h.e)[0]
                if len(infeasible) == 1:
                    j = int(infeasible[0])
                    i = int(np.argmax(score[:, j]))
                else:
                    i, j = divmod(int(np.argmax(score)), len(o.l))
                self.pi[n] = j
                if L >= 2:
                    self.z_o[n] = i
                    if self.z[n] == i:
                        others = [k for k in range(L) if k != i]
                        self.z[n] = int(rng.choice(others))
            self.c_o = np.array(
                [o.cats[self.pi[n]] for n, o in enumerate(self.data.scenes)],
                dtype=np.int64,
            )
            # word and category distributions start at their conditional
            # given this state, not the prior: near one-hot prior rows
            # would push the references around before the first
            # parameter update could see the vote coupling
            self._update_objects()
        else:
            self.z_o = None
            self.c_o = None
            self.phi_o = None
            self.v_o = None

    def _load(self, st: Snapshot):
        self.C = st.C.copy()
        self.counts = np.bincount(self.C, minlength=len(st.nu)).astype(np.int64)
        self.pi = st.pi.copy()
        self.z = st.z.copy()
        self.nu = st.nu.copy()
        self.kappa = st.kappa.copy()
        self.phi = st.phi.copy()
        self.mu = st.mu
        self.lam = st.lam
        self.psi = st.psi.copy()
        self.z_o = None if st.z_o is None else st.z_o.copy()
        self.c_o = None if st.c_o is None else st.c_o.copy()
        self.phi_o = None if st.phi_o is None else st.phi_o.copy()
        self.v_o = None if st.v_o is None else st.v_o.copy()

    def _refresh_caches(self):
        self.log_i0_kappa = log_i0(self.kappa)
        self.log_phi = np.log(np.maximum(self.phi, TINY))
        self.log_psi = np.log(np.maximum(self.psi, TINY))
        if self.with_objects:
            self.log_phi_o = np.log(np.maximum(self.phi_o, TINY))
            self.log_v_o = np.log(np.maximum(self.v_o, TINY))
        self.th_ref = np.array(
            [o.theta[self.pi[n]] for n, o in enumerate(self.data.scenes)]
        )
        self.l_ref = np.array(
            [o.l[self.pi[n]] for n, o in enumerate(self.data.scenes)]
        )
        self.wz = np.array(
            [o.words[self.z[n]] for n, o in enumerate(self.data.scenes)]
        )
        if self.with_objects:
            self.wzo = np.array(
                [
                    o.words[self.z_o[n]] if self.z_o[n] >= 0 else -1
                    for n, o in enumerate(self.data.scenes)
                ]
            )
        else:
            self.wzo = None

    # ----- sweeps -----

    def sweep(self, temperature: float = 1.0):
        """One full update round.

        ``temperature`` above 1 flattens the discrete assignment
        conditionals, which gives early sweeps room to escape the
        wrong-reference states a cold start at many candidate objects
        tends to lock into; the continuous updates always run cold.
        """
        if temperature <= 0.0:
            raise ValueError("temperature must be positive")
        self._sweep_concepts(temperature)
        self._sweep_references(temperature)
        self._sweep_slots(temperature)
        if not self.frozen:
            self._update_nu()
            self._update_kappa()
            self._update_mu_lam()
            self._update_phi_psi()
            if self.with_objects:
                self._update_objects()

    def _sweep_concepts(self, temperature: float = 1.0):
        """Blocked draw of (concept, reference) per scene.

        Sampling the pair jointly matters: a wrong reference makes the
        scene's direction nonsense, which a per-variable step can only
        fix by first moving the concept, and vice versa.  Enumerating
        concept x object keeps both reachable in one move.
        """
        rng, h, V = self.rng, self.h, self.V
        N = self.N
        frozen = self.frozen
        if not frozen:
            aux_nu, aux_kappa, aux_phi = _draw_concepts(h, V, rng, N * N_AUX)
            aux_nu = aux_nu.reshape(N, N_AUX)
            aux_kappa = aux_kappa.reshape(N, N_AUX)
            aux_logphi = np.log(np.maximum(aux_phi, TINY)).reshape(N, N_AUX, V)
            aux_phi = aux_phi.reshape(N, N_AUX, V)
            aux_logi0 = log_i0(aux_kappa)
            log_alpha_m = math.log(h.alpha_r / N_AUX)
        log_lam_term = 0.5 * (math.log(self.lam) - LOG_TWO_PI)
        for n in range(N):
            obs = self.data.scenes[n]
            wz = self.wz[n]
            c_old = int(self.C[n])
            self.counts[c_old] -= 1
            if frozen:
                prior_bias = h.alpha_r / len(self.nu)
                row_nu = self.nu
                row_kappa = self.kappa
                row_logi0 = self.log_i0_kappa
                row_prior = np.log(self.counts + prior_bias)
                row_logphi_w = self.log_phi[:, wz]
                n_rows = len(self.nu)
            else:
                a_nu = aux_nu[n].copy()
                a_kappa = aux_kappa[n].copy()
                a_logi0 = aux_logi0[n].copy()
                a_phi = aux_phi[n]
                a_logphi_w = aux_logphi[n, :, wz].copy()
                reuse_phi = None
                if self.counts[c_old] == 0:
                    # a dying concept's parameters fill the first slot
                    a_nu[0] = self.nu[c_old]
                    a_kappa[0] = self.kappa[c_old]
                    a_logi0[0] = self.log_i0_kappa[c_old]
                    a_logphi_w[0] = self.log_phi[c_old, wz]
                    reuse_phi = self.phi[c_old].copy()
                    self._drop_concept(c_old)
                S = len(self.nu)
                row_nu = np.concatenate([self.nu, a_nu])
                row_kappa = np.concatenate([self.kappa, a_kappa])
                row_logi0 = np.concatenate([self.log_i0_kappa, a_logi0])
                row_prior = np.concatenate(
                    [np.log(self.counts), np.full(N_AUX, log_alpha_m)]
                )
                row_logphi_w = np.concatenate(
                    [self.log_phi[:, wz], a_logphi_w]
                )
                n_rows = S + N_AUX
            # (concept, object) grid: direction term varies over both,
            # distance over objects, prior and word term over concepts
            logw = (
                row_kappa[:, None] * np.cos(obs.theta[None, :] - row_nu[:, None])
                - row_logi0[:, None]
                + row_prior[:, None]
                + row_logphi_w[:, None]
                + log_lam_term
                - 0.5 * self.lam * (obs.l[None, :] - self.mu) ** 2
            )
            infeasible = self._max_other_l[n, : len(obs.l)] > h.e
            if infeasible.any():
                logw[:, infeasible] = -np.inf
            if self.with_objects:
                logw += self.log_v_o[obs.cats][None, :]
                if self.z_o[n] >= 0:
                    logw += self.log_phi_o[obs.cats, obs.words[self.z_o[n]]][None, :]
            if temperature != 1.0:
                logw /= temperature
            flat = _sample_log(logw.ravel(), rng)
            c, j = divmod(flat, len(obs.l))
            if not frozen and c >= S:
                a = c - S
                phi_new = (
                    reuse_phi if (a == 0 and reuse_phi is not None) else a_phi[a]
                )
                self._append_concept(a_nu[a], a_kappa[a], phi_new)
                c = S
            self.C[n] = c
            self.counts[c] += 1
            self.pi[n] = j
            self.th_ref[n] = obs.theta[j]
            self.l_ref[n] = obs.l[j]
            if self.with_objects:
                self.c_o[n] = obs.cats[j]

    def _drop_concept(self, c: int):
        keep = np.arange(len(self.nu)) != c
        self.nu = self.nu[keep]
        self.kappa = self.kappa[keep]
        self.log_i0_kappa = self.log_i0_kappa[keep]
        self.phi = self.phi[keep]
        self.log_phi = self.log_phi[keep]
        self.counts = self.counts[keep]
        self.C[self.C > c] -= 1

    def _append_concept(self, nu: float, kappa: float, phi_row: np.ndarray):
        self.nu = np.append(self.nu, nu)
        self.kappa = np.append(self.kappa, kappa)
        self.log_i0_kappa = np.append(self.log_i0_kappa, log_i0(kappa))
        self.phi = np.vstack([self.phi, phi_row])
        self.log_phi = np.vstack([self.log_phi, np.log(np.maximum(phi_row, TINY))])
        self.counts = np.append(self.counts, 0)

    def _sweep_references(self, temperature: float = 1.0):
        h = self.h
        log_lam_term = 0.5 * (math.log(self.lam) - LOG_TWO_PI)
        for n, obs in enumerate(self.data.scenes):
            c = int(self.C[n])
            infeasible = np.nonzero(obs.l > h.e)[0]
            if len(infeasible) > 1:
                raise RuntimeError(
                    f"scene {n}: {len(infeasible)} objects outside the "
                    "background disc, no reference choice has support"
                )
            if len(infeasible) == 1:
                j = int(infeasible[0])
            else:
                logw = (
                    self.kappa[c] * np.cos(obs.theta - self.nu[c])
                    + log_lam_term
                    - 0.5 * self.lam * (obs.l - self.mu) ** 2
                )
                if self.with_objects:
                    logw = logw + self.log_v_o[obs.cats]
                    if self.z_o[n] >= 0:
                        wo = obs.words[self.z_o[n]]
                        logw = logw + self.log_phi_o[obs.cats, wo]
                if temperature != 1.0:
                    logw = logw / temperature
                j = _sample_log(logw, self.rng)
            self.pi[n] = j
            self.th_ref[n] = obs.theta[j]
            self.l_ref[n] = obs.l[j]
            if self.with_objects:
                self.c_o[n] = obs.cats[j]

    def _sweep_slots(self, temperature: float = 1.0):
        for n, obs in enumerate(self.data.scenes):
            c = int(self.C[n])
            L = len(obs.words)
            gain = self.log_phi[c, obs.words] - self.log_psi[obs.words]
            if temperature != 1.0:
                gain = gain / temperature
            if not self.with_objects:
                self.z[n] = _sample_log(gain, self.rng)
                self.wz[n] = obs.words[self.z[n]]
                continue
            if L == 1:
                self.z[n] = 0
                self.z_o[n] = -1
                self.wz[n] = obs.words[0]
                self.wzo[n] = -1
                continue
            gain_o = (
                self.log_phi_o[self.c_o[n], obs.words] - self.log_psi[obs.words]
            )
            if temperature != 1.0:
                gain_o = gain_o / temperature
            logw = gain[:, None] + gain_o[None, :]
            np.fill_diagonal(logw, -np.inf)
            flat = _sample_log(logw.ravel(), self.rng)
            self.z[n] = flat // L
            self.z_o[n] = flat % L
            self.wz[n] = obs.words[self.z[n]]
            self.wzo[n] = obs.words[self.z_o[n]]

    def _update_nu(self):
        h = self.h
        for s in range(len(self.nu)):
            members = self.C == s
            th = self.th_ref[members]
            sx = h.kappa0 * math.cos(h.nu0) + self.kappa[s] * np.cos(th).sum()
            sy = h.kappa0 * math.sin(h.nu0) + self.kappa[s] * np.sin(th).sum()
            post = VonMises(math.atan2(sy, sx), math.hypot(sx, sy))
            self.nu[s] = float(vm_sample(post, self.rng))

    def _update_kappa(self):
        h = self.h
        for s in range(len(self.kappa)):
            members = self.C == s
            cos_sum = float(np.cos(self.th_ref[members] - self.nu[s]).sum())
            m = int(members.sum())
            u = math.log(self.kappa[s])
            u_new = u + KAPPA_STEP * self.rng.normal()
            k_new = math.exp(u_new)
            log_i0_new = float(log_i0(k_new))
            delta = (
                (k_new - self.kappa[s]) * cos_sum
                - m * (log_i0_new - self.log_i0_kappa[s])
                + float(normal_logpdf(u_new, h.m0, 1.0 / h.sigma0**2))
                - float(normal_logpdf(u, h.m0, 1.0 / h.sigma0**2))
            )
            self.kappa_proposed += 1
            if math.log(self.rng.random()) < delta:
                self.kappa[s] = k_new
                self.log_i0_kappa[s] = log_i0_new
                self.kappa_accepted += 1

    def _update_mu_lam(self):
        h = self.h
        n = self.N
        prec = h.lambda0 + n * self.lam
        mean = (h.lambda0 * h.mu0 + self.lam * self.l_ref.sum()) / prec
        self.mu = self.rng.normal(mean, 1.0 / math.sqrt(prec))
        shape = h.a0 + 0.5 * n
        rate = h.b0 + 0.5 * float(((self.l_ref - self.mu) ** 2).sum())
        self.lam = self.rng.gamma(shape, 1.0 / rate)

    def _update_phi_psi(self):
        h = self.h
        S = len(self.nu)
        slot_counts = np.zeros((S, self.V))
        rest_counts = np.zeros(self.V)
        for n, obs in enumerate(self.data.scenes):
            keep = np.ones(len(obs.words), dtype=bool)
            keep[self.z[n]] = False
            if self.with_objects and self.z_o[n] >= 0:
                keep[self.z_o[n]] = False
            slot_counts[self.C[n], obs.words[self.z[n]]] += 1.0
            np.add.at(rest_counts, obs.words[keep], 1.0)
        g = self.rng.standard_gamma(h.beta_r + slot_counts)
        self.phi = g / g.sum(axis=1, keepdims=True)
        self.log_phi = np.log(np.maximum(self.phi, TINY))
        g = self.rng.standard_gamma(h.beta_psi + rest_counts)
        self.psi = g / g.sum()
        self.log_psi = np.log(np.maximum(self.psi, TINY))

    def _update_objects(self):
        h = self.h
        K = self.data.n_categories
        counts = np.zeros((K, self.V))
        for n, obs in enumerate(self.data.scenes):
            if self.z_o[n] >= 0:
                counts[self.c_o[n], obs.words[self.z_o[n]]] += 1.0
        g = self.rng.standard_gamma(h.beta_o + counts)
        self.phi_o = g / g.sum(axis=1, keepdims=True)
        self.log_phi_o = np.log(np.maximum(self.phi_o, TINY))
        g = self.rng.standard_gamma(
            h.alpha_o + np.bincount(self.c_o, minlength=K).astype(float)
        )
        self.v_o = g / g.sum()
        self.log_v_o = np.log(np.maximum(self.v_o, TINY))

    # ----- scoring -----

    def log_posterior(self) -> float:
        """Joint log density of state and data, up to a constant.

        The word and category distributions are integrated out
        analytically, so the score stays comparable across states with
        different numbers of concepts: a sampled sparse probability
        vector has an unbounded density that would otherwise reward
        spawning concepts.  With frozen parameters the sampled vectors
        are part of the state and are scored directly.
        """
        h = self.h
        S = len(self.nu)
        if self.frozen:
            bias = h.alpha_r / S
            lp = float(
                special.gammaln(self.counts + bias).sum()
                - S * special.gammaln(bias)
                + special.gammaln(h.alpha_r)
                - special.gammaln(h.alpha_r + self.N)
            )
        else:
            counts = self.counts[self.counts > 0].astype(float)
            lp = float(
                S * math.log(h.alpha_r)
                + special.gammaln(counts).sum()
                + special.gammaln(h.alpha_r)
                - special.gammaln(h.alpha_r + self.N)
            )
            lp += float(
                np.sum(
                    h.kappa0 * np.cos(self.nu - h.nu0)
                    - LOG_TWO_PI
                    - log_i0(h.kappa0)
                )
            )
            lp += float(lognormal_logpdf(self.kappa, h.m0, h.sigma0).sum())
            lp += float(normal_logpdf(self.mu, h.mu0, h.lambda0))
            lp += float(gamma_logpdf(self.lam, h.a0, h.b0))
        # geometry: concept branch for the chosen object, background for
        # the rest, impossible if any other object leaves the disc
        nu_c = self.nu[self.C]
        kappa_c = self.kappa[self.C]
        ref = (
            kappa_c * np.cos(self.th_ref - nu_c)
            - LOG_TWO_PI
            - self.log_i0_kappa[self.C]
            + 0.5 * (math.log(self.lam) - LOG_TWO_PI)
            - 0.5 * self.lam * (self.l_ref - self.mu) ** 2
        )
        violated = self._max_other_l[np.arange(self.N), self.pi] > h.e
        if np.any(violated):
            return -math.inf
        lp += float(ref.sum())
        lp -= float(
            ((self._n_objects - 1) * (math.log(h.e) + LOG_TWO_PI)).sum()
        )
        lp -= float(np.log(self._n_objects).sum())  # uniform reference prior
        # words: shared distribution everywhere, slot corrections on top,
        # all rescaled by the unigram probabilities
        lp -= self._log_unigram_total
        if self.frozen:
            lp += float(self._vocab_counts @ self.log_psi)
            lp += float(
                (self.log_phi[self.C, self.wz] - self.log_psi[self.wz]).sum()
            )
            if self.with_objects:
                have = self.wzo >= 0
                lp += float(
                    (
                        self.log_phi_o[self.c_o[have], self.wzo[have]]
                        - self.log_psi[self.wzo[have]]
                    ).sum()
                )
        else:
            slot_counts = np.zeros((S, self.V))
            np.add.at(slot_counts, (self.C, self.wz), 1.0)
            lp += _dm_rows(slot_counts, h.beta_r)
            rest = self._vocab_counts - np.bincount(
                self.wz, minlength=self.V
            ).astype(float)
            if self.with_objects:
                have = self.wzo >= 0
                rest -= np.bincount(
                    self.wzo[have], minlength=self.V
                ).astype(float)
                obj_counts = np.zeros((self.data.n_categories, self.V))
                np.add.at(
                    obj_counts, (self.c_o[have], self.wzo[have]), 1.0
                )
                lp += _dm_rows(obj_counts, h.beta_o)
                cat_counts = np.bincount(
                    self.c_o, minlength=self.data.n_categories
                ).astype(float)
                lp += _dm_rows(cat_counts[None, :], h.alpha_o)
            lp += _dm_rows(rest[None, :], h.beta_psi)
        if self.with_objects:
            # slot priors: uniform over ordered pairs, or over positions
            # when the utterance has a single word
            L = self._n_words
            pairs = L >= 2
            lp -= float(np.log(L[pairs] * (L[pairs] - 1.0)).sum())
            lp -= float(np.log(L[~pairs]).sum())
        else:
            lp -= float(np.log(self._n_words).sum())
        return lp

    def snapshot(self) -> Snapshot:
        return Snapshot(
            C=self.C.copy(),
            pi=self.pi.copy(),
            z=self.z.copy(),
            nu=self.nu.copy(),
            kappa=self.kappa.copy(),
            phi=self.phi.copy(),
            mu=float(self.mu),
            lam=float(self.lam),
            psi=self.psi.copy(),
            log_post=self.log_posterior(),
            z_o=None if self.z_o is None else self.z_o.copy(),
            c_o=None if self.c_o is None else self.c_o.copy(),
            phi_o=None if self.phi_o is None else self.phi_o.copy(),
            v_o=None if self.v_o is None else self.v_o.copy(),
        )


def _draw_concepts(h: Hyperparams, n_words: int, rng: np.random.Generator,
                   size: int):
    nu = np.mod(rng.vonmises(h.nu0, h.kappa0, size=size), 2.0 * math.pi)
    kappa = rng.lognormal(h.m0, h.sigma0, size=size)
    g = rng.standard_gamma(h.beta_r, size=(size, n_words))
    phi = g / np.maximum(g.sum(axis=1, keepdims=True), TINY)
    return nu, kappa, phi


def _sample_log(logw: np.ndarray, rng: np.random.Generator) -> int:
    """Draw an index proportionally to ``exp(logw)``."""
    hi = logw.max()
    if hi == -np.inf:
        raise RuntimeError("all candidates have zero probability")
    cum = np.cumsum(np.exp(logw - hi))
    idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return min(idx, len(cum) - 1)


def _max_excluding_self(l: np.ndarray) -> np.ndarray:
    """For each index, the maximum of the other entries (-inf if alone)."""
    if len(l) == 1:
        return np.array([-np.inf])
    order = np.argsort(l)
    top, second = l[order[-1]], l[order[-2]]
    out = np.full(len(l), top)
    out[order[-1]] = second
    return out


def _dm_rows(counts: np.ndarray, alpha: float) -> float:
    """Dirichlet-multinomial log marginal, summed over rows of ``counts``.

    Each row holds per-outcome counts drawn from a categorical whose
    probabilities carry a symmetric Dirichlet(alpha) prior.
    """
    rows, dim = counts.shape
    totals = counts.sum(axis=1)
    return float(
        special.gammaln(alpha + counts).sum()
        - rows * dim * special.gammaln(alpha)
        + rows * special.gammaln(alpha * dim)
        - special.gammaln(alpha * dim + totals).sum()
    )


def run_chain(
    data: LearnData,
    h: Hyperparams,
    rng: np.random.Generator,
    sweeps: int = 100,
    burnin: int = 50,
    with_objects: bool = False,
    anneal_start: float = 1.0,
    restarts: int = 1,
    warmup: int = 30,
) -> ChainResult:
    """Run one MCMC chain and keep a snapshot per sweep.

    When ``anneal_start`` is above 1 the first sweeps run the
    assignment conditionals at a temperature falling linearly to 1
    inside the burn-in window, so the post-burn-in chain targets the
    exact posterior.  The ramp helps mixing on small candidate sets
    but scatters the distance-guided initialisation that recovery
    with many candidate objects relies on, so it stays off by
    default.

    With ``restarts`` above 1, that many independently seeded chains
    run ``warmup`` sweeps each and the one with the highest joint log
    density continues for the full schedule.  With many candidate
    objects the sampler either couples references, concepts and words
    early or settles into a merged state hundreds of nats below the
    coupled one, and extra sweeps never convert a merged chain, so a
    short scored warmup is where extra budget pays off.
    """
    if not 0 <= burnin < sweeps:
        raise ValueError("need 0 <= burnin < sweeps")
    if anneal_start < 1.0:
        raise ValueError("anneal_start must be at least 1")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    if warmup < 0:
        raise ValueError("warmup must be non-negative")
    if restarts > 1:
        starters = [
            ConceptSampler(data, h, child, with_objects=with_objects)
            for child in rng.spawn(restarts)
        ]
        for cand in starters:
            for _ in range(warmup):
                cand.sweep()
        sampler = max(starters, key=lambda cand: cand.log_posterior())
    else:
        sampler = ConceptSampler(data, h, rng, with_objects=with_objects)
    ramp = min(30, burnin)
    snaps = []
    for t in range(sweeps):
        if t < ramp and anneal_start > 1.0:
            temp = anneal_start + (1.0 - anneal_start) * (t + 1) / ramp
        else:
            temp = 1.0
        sampler.sweep(temp)
        snaps.append(sampler.snapshot())
    rate = (
        sampler.kappa_accepted / sampler.kappa_proposed
        if sampler.kappa_proposed
        else 0.0
    )
    return ChainResult(snapshots=snaps, burnin=burnin, kappa_accept_rate=rate)


def summarize(chain: ChainResult) -> PointEstimate:
    """Collapse a chain into a point estimate.

    The best post-burn-in sweep (by joint log density) fixes all the
    discrete variables; continuous parameters are averaged over the
    post-burn-in sweeps whose concept assignment matches it exactly,
    with the circular mean for directions.
    """
    post = chain.posterior()
    if not post:
        raise ValueError("empty posterior sample")
    best = max(post, key=lambda s: s.log_post)
    matching = [s for s in post if np.array_equal(s.C, best.C)]
    nu = np.arctan2(
        np.mean([np.sin(s.nu) for s in matching], axis=0),
        np.mean([np.cos(s.nu) for s in matching], axis=0),
    ) % (2.0 * math.pi)
    phi = np.mean([s.phi for s in matching], axis=0)
    phi /= phi.sum(axis=1, keepdims=True)
    psi = np.mean([s.psi for s in matching], axis=0)
    psi /= psi.sum()
    est = PointEstimate(
        C=best.C.copy(),
        pi=best.pi.copy(),
        z=best.z.copy(),
        nu=nu,
        kappa=np.mean([s.kappa for s in matching], axis=0),
        phi=phi,
        mu=float(np.mean([s.mu for s in matching])),
        lam=float(np.mean([s.lam for s in matching])),
        psi=psi,
        log_post=best.log_post,
        n_matching=len(matching),
    )
    if best.z_o is not None:
        phi_o = np.mean([s.phi_o for s in matching], axis=0)
        phi_o /= phi_o.sum(axis=1, keepdims=True)
        v_o = np.mean([s.v_o for s in matching], axis=0)
        est.z_o = best.z_o.copy()
        est.c_o = best.c_o.copy()
        est.phi_o = phi_o
        est.v_o = v_o / v_o.sum()
    return est


def mutual_information(est: PointEstimate, data: LearnData) -> float:
    """Information between concepts and the words at their slots.

    Measures how peaked each concept's word distribution is relative to
    the mixture over concepts, weighted by how often concepts occur;
    higher values mean corpus segmentations whose slot words identify
    concepts well.
    """
    weights = est.concept_weights()
    wz = np.array(
        [obs.words[est.z[n]] for n, obs in enumerate(data.scenes)]
    )
    return _slot_information(est.phi, weights, wz)


def object_information(est: PointEstimate, data: LearnData) -> float:
    """Same as :func:`mutual_information` but for object categories."""
    if est.phi_o is None:
        raise ValueError("no object state in this estimate")
    K = est.phi_o.shape[0]
    have = est.z_o >= 0
    counts = np.bincount(est.c_o[have], minlength=K).astype(float)
    if counts.sum() == 0:
        return 0.0
    weights = counts / counts.sum()
    wz = np.array(
        [
            obs.words[est.z_o[n]]
            for n, obs in enumerate(data.scenes)
            if est.z_o[n] >= 0
        ]
    )
    return _slot_information(est.phi_o, weights, wz)


def _slot_information(phi: np.ndarray, weights: np.ndarray,
                      word_ids: np.ndarray) -> float:
    cols = phi[:, word_ids]  # (S, n)
    joint = cols * weights[:, None]
    mix = joint.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(joint > 0.0, np.log(cols) - np.log(mix), 0.0)
    return float((joint * ratio).sum())
