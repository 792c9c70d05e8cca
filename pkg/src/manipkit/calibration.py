"""End-effector offset calibration from human-annotated keypoint pixels.

The offset is a 3-vector translation in the EE link frame. It is fit by damped
Gauss-Newton on the stacked per-keypoint pixel residuals (central-difference
Jacobian); the reported errors are mean Euclidean pixel distances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .episode import CameraParams, FrameRecord
from .errors import DivergenceError, MaxIterError, NoSamplesError
from .robots import RobotModel, project_keypoints


@dataclass(frozen=True)
class CalibrationSample:
    episode_id: str
    frame: int
    annotated: dict[str, tuple[float, float]]  # keypoint -> annotated pixel
    frame_record: FrameRecord


@dataclass(frozen=True)
class CalibrationConfig:
    jacobian_step: float = 1e-6  # meters, central differences
    step_tol: float = 1e-7  # meters, convergence on step norm
    max_iter: int = 200
    init_damping: float = 1e-3


@dataclass(frozen=True)
class CalibrationResult:
    offset: tuple[float, float, float]
    initial_error: float
    final_error: float
    iterations: int
    converged: bool


def _residuals(model, camera: CameraParams, samples, offset) -> np.ndarray:
    """Stacked (du, dv) residuals; invisible keypoints contribute the image diagonal."""
    diagonal = float(np.hypot(camera.width, camera.height))
    penalty = diagonal / np.sqrt(2.0)
    out = []
    for sample in samples:
        proj = project_keypoints(model, camera, sample.frame_record, ee_offset=offset)
        for name, (u, v) in sorted(sample.annotated.items()):
            if name in proj.pixels:
                pu, pv = proj.pixels[name]
                out.extend((pu - u, pv - v))
            else:
                out.extend((penalty, penalty))
    return np.asarray(out)


def reprojection_error(model: RobotModel, camera: CameraParams, samples, offset) -> float:
    """Mean Euclidean pixel distance over all (sample, keypoint) pairs.

    Invisible projections count as one image diagonal each, keeping the
    objective finite and pushing offsets back into view.

    Raises:
        NoSamplesError: empty sample list.
    """
    if not samples:
        raise NoSamplesError("no calibration samples")
    r = _residuals(model, camera, samples, np.asarray(offset, dtype=float))
    return float(np.mean(np.hypot(r[0::2], r[1::2])))


def calibrate_offset(
    model: RobotModel,
    camera: CameraParams,
    samples,
    config: CalibrationConfig | None = None,
    strict: bool = False,
) -> CalibrationResult:
    """Fit the EE offset by damped Gauss-Newton starting from zero.

    The damping factor is multiplied by 10 on a failed step and divided by 10
    on success; only cost-decreasing steps are accepted, so final_error never
    exceeds initial_error. Iteration stops when the step norm drops below
    ``config.step_tol`` or after ``config.max_iter`` iterations (in the latter
    case ``converged`` is False; with ``strict=True`` MaxIterError is raised
    instead of returning the best iterate).

    Raises:
        NoSamplesError: empty sample list.
        DivergenceError: objective not finite.
    """
    if not samples:
        raise NoSamplesError("no calibration samples")
    cfg = config or CalibrationConfig()
    ordered = sorted(samples, key=lambda s: (s.episode_id, s.frame))

    x = np.zeros(3)
    r = _residuals(model, camera, ordered, x)
    cost = float(r @ r)
    if not np.isfinite(cost):
        raise DivergenceError("objective not finite at zero offset")
    initial_error = reprojection_error(model, camera, ordered, x)

    lam = cfg.init_damping
    converged = False
    iterations = 0
    h = cfg.jacobian_step
    while iterations < cfg.max_iter:
        iterations += 1
        jac = np.empty((r.size, 3))
        for k in range(3):
            dx = np.zeros(3)
            dx[k] = h
            jac[:, k] = (
                _residuals(model, camera, ordered, x + dx)
                - _residuals(model, camera, ordered, x - dx)
            ) / (2 * h)
        g = jac.T @ r
        hess = jac.T @ jac
        try:
            step = np.linalg.solve(hess + lam * np.eye(3), -g)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue
        if float(np.linalg.norm(step)) < cfg.step_tol:
            converged = True
            break
        trial = x + step
        r_trial = _residuals(model, camera, ordered, trial)
        cost_trial = float(r_trial @ r_trial)
        if not np.isfinite(cost_trial):
            raise DivergenceError(f"objective not finite at offset {trial}")
        if cost_trial < cost:
            x, r, cost = trial, r_trial, cost_trial
            lam = max(lam / 10.0, 1e-12)
        else:
            lam *= 10.0
            if lam > 1e14:  # fully stalled; larger damping cannot help
                break

    if not converged and strict:
        raise MaxIterError(f"no convergence within {cfg.max_iter} iterations")
    return CalibrationResult(
        offset=tuple(float(v) for v in x),
        initial_error=initial_error,
        final_error=reprojection_error(model, camera, ordered, x),
        iterations=iterations,
        converged=converged,
    )
