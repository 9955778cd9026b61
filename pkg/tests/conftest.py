import numpy as np
import pytest

from amhkit.ingest import ReturnSeries, month_ends


def make_returns(values, mean_adjusted=False) -> ReturnSeries:
    values = np.asarray(values, dtype=float)
    return ReturnSeries(dates=month_ends(len(values)), values=values,
                        mean_adjusted=mean_adjusted)


def random_psd(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    A = rng.standard_normal((n, n))
    return scale * (A @ A.T) / n + 1e-6 * np.eye(n)


def oracle_terminal(F, B, G, Q, H, R, x0, P0, y, controls):
    """Brute-force conditional mean/cov of x_{T-1} given y_0..y_{T-1}.

    Builds the joint Gaussian of all states and observations from the base
    variables (x0 deviation, then the process noises) and conditions exactly.
    Independent of the filter recursions it checks.
    """
    T = len(y)
    n = F.shape[0]
    q = Q.shape[0]
    dim = n + (T - 1) * q
    Sigma_xi = np.zeros((dim, dim))
    Sigma_xi[:n, :n] = P0
    for t in range(T - 1):
        s = n + t * q
        Sigma_xi[s : s + q, s : s + q] = Q
    A = np.zeros((T, n, dim))
    mu = np.zeros((T, n))
    A[0, :, :n] = np.eye(n)
    mu[0] = x0
    for t in range(1, T):
        A[t] = F @ A[t - 1]
        s = n + (t - 1) * q
        A[t][:, s : s + q] += G
        mu[t] = F @ mu[t - 1]
        if controls is not None and B is not None:
            mu[t] += B @ controls[t - 1]
    C = np.stack([H @ A[t] for t in range(T)])
    mu_y = np.array([H @ mu[t] for t in range(T)])
    Syy = C @ Sigma_xi @ C.T + R * np.eye(T)
    Sxy = A[T - 1] @ Sigma_xi @ C.T
    Sxx = A[T - 1] @ Sigma_xi @ A[T - 1].T
    mean = mu[T - 1] + Sxy @ np.linalg.solve(Syy, y - mu_y)
    cov = Sxx - Sxy @ np.linalg.solve(Syy, Sxy.T)
    return mean, cov


@pytest.fixture
def price_csv(tmp_path):
    """Factory writing a `date,close` CSV and returning its path."""

    def write(closes, name="prices.csv", dates=None):
        if dates is None:
            dates = month_ends(len(closes))
        lines = ["date,close"]
        for d, c in zip(dates, closes):
            lines.append(f"{d.isoformat()},{c}")
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n")
        return path

    return write
