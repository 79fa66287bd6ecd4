"""Hot numeric kernels shared by the library.

Everything here operates on plain ``complex128``/``float64`` ndarrays and is
written so the same source compiles under ``numba.njit`` (the default) and
runs unchanged as pure numpy when ``QDK_PURE_NUMPY=1``.  Higher-level modules
wrap these in validated, documented APIs.

Kernels:

* ``jacobi_eigh``   -- cyclic Jacobi eigensolver for dense Hermitian matrices
* ``apply_kraus`` / ``dual_apply_kraus`` -- channel action
* ``f0_eval`` / ``fw_trace_norm_min``    -- Frank-Wolfe minimization of the
  convex objective Tr|X_rho| over the density-matrix simplex
* ``pair_fidelity`` / ``wcf_descent``    -- entanglement fidelity between two
  channels through the Kraus overlap matrix, and its minimization over input
  states parameterized by an unconstrained complex matrix
* ``project_povm`` / ``povm_ascent``     -- projected supergradient ascent of
  the minimax discrimination objective over the POVM polytope
* ``simplex_project`` -- Euclidean projection onto the probability simplex
"""

import numpy as np

from ._accel import maybe_njit

# Relative support cutoff on eigenvalues of X^dag X (i.e. squared singular
# values) when inverting for a polar factor.  Must sit well above the
# eigensolver noise floor (~1e-15 relative) or the inverted columns blow up.
_SUPPORT_CUT = 1e-12

_GOLDEN = 0.6180339887498949


@maybe_njit
def dagger(a):
    return np.ascontiguousarray(a.conj().T)


@maybe_njit
def hermitize(a):
    return 0.5 * (a + dagger(a))


@maybe_njit
def fro_norm(a):
    s = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            s += abs(a[i, j]) ** 2
    return np.sqrt(s)


@maybe_njit
def trace_of(a):
    t = 0.0 + 0.0j
    for i in range(a.shape[0]):
        t += a[i, i]
    return t


@maybe_njit
def _offdiag_fro(a):
    s = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            if i != j:
                s += abs(a[i, j]) ** 2
    return np.sqrt(s)


@maybe_njit
def jacobi_eigh(mat, tol=1e-12):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(w, v, status)`` with eigenvalues sorted descending, columns of
    ``v`` the matching orthonormal eigenvectors with the phase convention
    that each column's largest-magnitude component is real positive.
    ``status`` is 0 on convergence, 1 if the sweep budget ran out.
    """
    d = mat.shape[0]
    a = hermitize(mat.astype(np.complex128))
    v = np.eye(d, dtype=np.complex128)
    if d == 1:
        w = np.empty(1, dtype=np.float64)
        w[0] = a[0, 0].real
        return w, v, 0

    norm = fro_norm(a)
    thresh = tol * max(1.0, norm)
    status = 1
    max_sweeps = 100 * d * d
    for _sweep in range(max_sweeps):
        if _offdiag_fro(a) <= thresh:
            status = 0
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                m = abs(apq)
                if m < 1e-300:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                phase = apq / m
                tau = (aqq - app) / (2.0 * m)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                sp = s * phase
                spc = s * np.conj(phase)
                # columns: A <- A R, with R[p,p]=c, R[p,q]=s*phase,
                # R[q,p]=-s*conj(phase), R[q,q]=c
                for k in range(d):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - spc * akq
                    a[k, q] = sp * akp + c * akq
                # rows: A <- R^dag A
                for k in range(d):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - sp * aqk
                    a[q, k] = spc * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = complex(a[p, p].real, 0.0)
                a[q, q] = complex(a[q, q].real, 0.0)
                for k in range(d):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - spc * vkq
                    v[k, q] = sp * vkp + c * vkq
    if status == 1 and _offdiag_fro(a) <= thresh:
        status = 0

    w = np.empty(d, dtype=np.float64)
    for i in range(d):
        w[i] = a[i, i].real
    order = np.argsort(-w)
    ws = np.empty(d, dtype=np.float64)
    vs = np.empty((d, d), dtype=np.complex128)
    for j in range(d):
        ws[j] = w[order[j]]
        for i in range(d):
            vs[i, j] = v[i, order[j]]
    # phase convention: largest-magnitude component real positive
    for j in range(d):
        kbest = 0
        best = -1.0
        for i in range(d):
            m = abs(vs[i, j])
            if m > best + 1e-15:
                best = m
                kbest = i
        ph = vs[kbest, j]
        m = abs(ph)
        if m > 0.0:
            ph = np.conj(ph) / m
            for i in range(d):
                vs[i, j] = vs[i, j] * ph
    return ws, vs, status


@maybe_njit
def apply_kraus(ks, rho):
    """Sum_i E_i rho E_i^dag for a stacked Kraus array ks of shape (r, out, in)."""
    r, dout, _ = ks.shape
    out = np.zeros((dout, dout), dtype=np.complex128)
    for i in range(r):
        e = np.ascontiguousarray(ks[i])
        out += e @ rho @ dagger(e)
    return out


@maybe_njit
def dual_apply_kraus(ks, a):
    """Sum_i E_i^dag a E_i (Heisenberg-picture action)."""
    r, _, din = ks.shape
    out = np.zeros((din, din), dtype=np.complex128)
    for i in range(r):
        e = np.ascontiguousarray(ks[i])
        out += dagger(e) @ a @ e
    return out


@maybe_njit
def _assemble_x(ks, vmat, rho):
    """X = sum_i (rho K_i^dag) kron v_i, shape (din*L, dout)."""
    r, dout, din = ks.shape
    L = vmat.shape[1]
    x = np.zeros((din * L, dout), dtype=np.complex128)
    for i in range(r):
        m = rho @ dagger(np.ascontiguousarray(ks[i]))  # din x dout
        for c in range(din):
            base = c * L
            for t in range(L):
                vit = vmat[i, t]
                if vit != 0.0:
                    for b in range(dout):
                        x[base + t, b] += m[c, b] * vit
    return x


@maybe_njit
def f0_eval(ks, vmat, rho):
    """Tr|X_rho| for the trace-norm objective (sum of singular values of X)."""
    x = _assemble_x(ks, vmat, rho)
    h = dagger(x) @ x
    w, _q, _st = jacobi_eigh(h)
    val = 0.0
    for k in range(w.shape[0]):
        if w[k] > 0.0:
            val += np.sqrt(w[k])
    return val


@maybe_njit
def _f0_subgradient(ks, vmat, rho):
    """Value and a trace-norm subgradient of rho -> Tr|X_rho| (Hermitian matrix)."""
    r, dout, din = ks.shape
    L = vmat.shape[1]
    x = _assemble_x(ks, vmat, rho)
    h = dagger(x) @ x
    w, q, _st = jacobi_eigh(h)
    val = 0.0
    wmax = max(w[0], 0.0)
    inv = np.zeros(dout, dtype=np.float64)
    for k in range(dout):
        if w[k] > 0.0:
            val += np.sqrt(w[k])
        if w[k] > wmax * _SUPPORT_CUT and w[k] > 0.0:
            inv[k] = 1.0 / np.sqrt(w[k])
    # partial-isometry polar factor U = X q diag(inv) q^dag
    qi = np.empty((dout, dout), dtype=np.complex128)
    for i in range(dout):
        for j in range(dout):
            qi[i, j] = q[i, j] * inv[j]
    u = x @ qi @ dagger(q)  # (din*L, dout)
    g = np.zeros((din, din), dtype=np.complex128)
    for i in range(r):
        s = np.zeros((din, dout), dtype=np.complex128)
        for c in range(din):
            base = c * L
            for t in range(L):
                vit = np.conj(vmat[i, t])
                if vit != 0.0:
                    for b in range(dout):
                        s[c, b] += vit * u[base + t, b]
        g += s @ np.ascontiguousarray(ks[i])
    return val, hermitize(g)


@maybe_njit
def _golden_min(ks, vmat, rho, direction, lo, hi, iters):
    a = lo
    b = hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = f0_eval(ks, vmat, rho + c * direction)
    fd = f0_eval(ks, vmat, rho + d * direction)
    for _ in range(iters):
        if fc < fd:
            b = d
            d = c
            fd = fc
            c = b - _GOLDEN * (b - a)
            fc = f0_eval(ks, vmat, rho + c * direction)
        else:
            a = c
            c = d
            fc = fd
            d = a + _GOLDEN * (b - a)
            fd = f0_eval(ks, vmat, rho + d * direction)
    if fc < fd:
        return c, fc
    return d, fd


@maybe_njit
def fw_trace_norm_min(ks, vmat, rho0, max_iter, gap_tol, stall_limit=400):
    """Frank-Wolfe minimization of rho -> Tr|X_rho| over density matrices.

    The linear subproblem over the simplex is solved exactly by the bottom
    eigenvector of the subgradient; the duality gap certifies suboptimality.
    Steps use the classic 2/(k+2) schedule, improved by a golden-section
    line search when that wins.

    Returns (rho_best, value_best, gap_at_best, iterations, status):
    status 0 = gap tolerance met, 1 = iteration budget exhausted,
    2 = value stalled (typical at rank-deficient optima, where no computable
    subgradient closes the gap; the value itself is still correct there).
    """
    din = rho0.shape[0]
    rho = rho0.copy()
    best_val = 1e300
    best_gap = 1e300
    best_rho = rho.copy()
    status = 1
    it = 0
    stall = 0
    for k in range(max_iter):
        it = k + 1
        val, g = _f0_subgradient(ks, vmat, rho)
        wg, qg, _st = jacobi_eigh(g)
        lam_min = wg[din - 1]
        gap = trace_of(g @ rho).real - lam_min
        if val < best_val - 1e-14:
            best_val = val
            best_rho = rho.copy()
            best_gap = gap
            stall = 0
        else:
            if val <= best_val and gap < best_gap:
                best_val = val
                best_rho = rho.copy()
                best_gap = gap
            stall += 1
        if gap <= gap_tol:
            if val <= best_val + gap_tol:
                best_val = val
                best_rho = rho.copy()
                best_gap = gap
            status = 0
            break
        if stall >= stall_limit:
            status = 2
            break
        u = np.ascontiguousarray(qg[:, din - 1])
        vertex = np.empty((din, din), dtype=np.complex128)
        for i in range(din):
            for j in range(din):
                vertex[i, j] = u[i] * np.conj(u[j])
        direction = vertex - rho
        gamma_sched = 2.0 / (k + 2.0)
        f_sched = f0_eval(ks, vmat, rho + gamma_sched * direction)
        gamma_ls, f_ls = _golden_min(ks, vmat, rho, direction, 0.0, 1.0, 40)
        if f_ls < f_sched:
            gamma = gamma_ls
        else:
            gamma = gamma_sched
        rho = hermitize(rho + gamma * direction)
    return best_rho, best_val, best_gap, it, status


@maybe_njit
def overlap_matrix(p, c):
    """y[n, m] = Tr(C^dag P[n,m] C) for the cross-operator array P."""
    en, em = p.shape[0], p.shape[1]
    y = np.zeros((en, em), dtype=np.complex128)
    for n in range(en):
        for m in range(em):
            y[n, m] = trace_of(dagger(c) @ np.ascontiguousarray(p[n, m]) @ c)
    return y


@maybe_njit
def pair_fidelity(p, c):
    """Entanglement fidelity of the channel pair at the state C C^dag / Tr."""
    t = 0.0
    for i in range(c.shape[0]):
        for j in range(c.shape[1]):
            t += abs(c[i, j]) ** 2
    if t <= 0.0:
        return 0.0
    y = overlap_matrix(p, c)
    w, _q, _st = jacobi_eigh(dagger(y) @ y)
    num = 0.0
    for k in range(w.shape[0]):
        if w[k] > 0.0:
            num += np.sqrt(w[k])
    return num / t


@maybe_njit
def _wcf_value_grad(p, c):
    en, em = p.shape[0], p.shape[1]
    t = 0.0
    for i in range(c.shape[0]):
        for j in range(c.shape[1]):
            t += abs(c[i, j]) ** 2
    y = overlap_matrix(p, c)
    wmat = np.ascontiguousarray(y.T)  # eM x eN
    g = dagger(wmat) @ wmat
    w, q, _st = jacobi_eigh(g)
    num = 0.0
    wmax = max(w[0], 0.0)
    en_dim = w.shape[0]
    inv = np.zeros(en_dim, dtype=np.float64)
    for k in range(en_dim):
        if w[k] > 0.0:
            num += np.sqrt(w[k])
        if w[k] > wmax * _SUPPORT_CUT and w[k] > 0.0:
            inv[k] = 1.0 / np.sqrt(w[k])
    qi = np.empty((en_dim, en_dim), dtype=np.complex128)
    for i in range(en_dim):
        for j in range(en_dim):
            qi[i, j] = q[i, j] * inv[j]
    u_w = wmat @ qi @ dagger(q)  # eM x eN polar partial isometry
    a_opt = dagger(u_w)  # eN x eM, maximizes Re sum A_nm y_nm
    d = c.shape[0]
    h = np.zeros((d, d), dtype=np.complex128)
    for n in range(en):
        for m in range(em):
            h += a_opt[n, m] * np.ascontiguousarray(p[n, m])
    h = hermitize(h)
    fval = num / t
    grad = (h @ c - fval * c) / t
    return fval, grad


@maybe_njit
def wcf_descent(p, c0, max_iter, rel_tol):
    """Minimize the entanglement fidelity over input states.

    Gradient descent on the unconstrained complex parameterization
    rho = C C^dag / Tr(C C^dag), with an adaptive step and the analytic
    envelope gradient.  Returns (value, C, converged).
    """
    c = c0 / fro_norm(c0)
    fval, grad = _wcf_value_grad(p, c)
    eta = 0.2
    best_f = fval
    best_c = c.copy()
    converged = 0
    stagnant = 0
    f_anchor = fval
    for _k in range(max_iter):
        if _k % 40 == 39:
            # windowed progress check: the normalized-step descent can
            # sawtooth with tiny per-iteration gains near the optimum
            if f_anchor - fval < 1e-12 * max(1.0, abs(fval)):
                converged = 1
                break
            f_anchor = fval
        gn = fro_norm(grad)
        if gn < 1e-300:
            converged = 1
            break
        step = grad * (1.0 / gn)
        accepted = False
        f_new = fval
        c_new = c
        for _tries in range(12):
            c_try = c - eta * step
            nrm = fro_norm(c_try)
            if nrm < 1e-300:
                eta *= 0.5
                continue
            c_try = c_try / nrm
            f_try = pair_fidelity(p, c_try)
            if f_try < fval - 1e-15:
                accepted = True
                f_new = f_try
                c_new = c_try
                break
            eta *= 0.5
            if eta < 1e-13:
                break
        if not accepted:
            converged = 1
            break
        move = fro_norm(c_new - c)
        gain = fval - f_new
        c = c_new
        fval, grad = _wcf_value_grad(p, c)
        if fval < best_f:
            best_f = fval
            best_c = c.copy()
        eta = min(eta * 1.2, 1.0)
        if gain < 1e-13 * max(1.0, abs(fval)):
            stagnant += 1
            if stagnant >= 8:
                converged = 1
                break
        else:
            stagnant = 0
        if move < rel_tol:
            converged = 1
            break
    return best_f, best_c, converged


@maybe_njit
def project_povm(elements, iters):
    """Dykstra projection onto {A_i >= 0, sum_i A_i = 1}."""
    k, d, _ = elements.shape
    x = elements.copy()
    p_inc = np.zeros_like(x)
    q_inc = np.zeros_like(x)
    eye = np.eye(d, dtype=np.complex128)
    for _ in range(iters):
        y = np.empty_like(x)
        for i in range(k):
            w, v, _st = jacobi_eigh(hermitize(x[i] + p_inc[i]))
            wc = np.empty_like(w)
            for j in range(d):
                wc[j] = w[j] if w[j] > 0.0 else 0.0
            y[i] = (v * wc) @ dagger(v)
        p_inc = x + p_inc - y
        total = np.zeros((d, d), dtype=np.complex128)
        for i in range(k):
            total += y[i] + q_inc[i]
        shift = (total - eye) / k
        for i in range(k):
            x[i] = y[i] + q_inc[i] - shift
        q_inc = y + q_inc - x
    return x


@maybe_njit
def povm_ascent(stack, a0, max_iter, step0, proj_iters):
    """Projected supergradient ascent of min_i Tr(rho_i A_i) over POVMs.

    The objective is concave over the convex POVM polytope; supergradients
    average the states attaining (near-)minimal success.  Returns the best
    POVM found and its value.
    """
    k, d, _ = stack.shape
    a = a0.copy()

    def success(arr):
        lo = 1e300
        for i in range(k):
            t = trace_of(np.ascontiguousarray(stack[i]) @ np.ascontiguousarray(arr[i])).real
            if t < lo:
                lo = t
        return lo

    val = success(a)
    step = step0
    for _it in range(max_iter):
        traces = np.empty(k)
        for i in range(k):
            traces[i] = trace_of(
                np.ascontiguousarray(stack[i]) @ np.ascontiguousarray(a[i])
            ).real
        lo = traces.min()
        thresh = lo + 1e-7 + 0.1 * step
        n_active = 0
        for i in range(k):
            if traces[i] <= thresh:
                n_active += 1
        grad = np.zeros_like(a)
        for i in range(k):
            if traces[i] <= thresh:
                grad[i] = stack[i] / n_active
        a_try = project_povm(a + step * grad, proj_iters)
        val_try = success(a_try)
        if val_try > val + 1e-14:
            a = a_try
            val = val_try
            step = min(step * 1.2, 1.0)
        else:
            step *= 0.6
            if step < 1e-9:
                break
    return a, val


@maybe_njit
def simplex_project(y):
    """Euclidean projection of a real vector onto the probability simplex."""
    n = y.shape[0]
    u = np.sort(y)[::-1]
    css = 0.0
    rho = -1
    theta = 0.0
    for j in range(n):
        css += u[j]
        t = (1.0 - css) / (j + 1.0)
        if u[j] + t > 0.0:
            rho = j
            theta = t
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        v = y[i] + theta
        out[i] = v if v > 0.0 else 0.0
    return out
