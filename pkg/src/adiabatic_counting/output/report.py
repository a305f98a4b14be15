"""
Report files for counting runs, scaling sweeps and integrator trajectories.

Outputs carry no timestamps and use sorted keys, so identical inputs give
byte-identical files.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Tuple

import pandas as pd

from ..analysis.scheduler import ScalingCurve
from ..core.models import CountingResult, RunConfig

logger = logging.getLogger(__name__)

RESULT_FILE = "result.json"
STAGES_FILE = "stages.jsonl"
SCALING_FILE = "scaling.csv"
SCALING_COLUMNS = ['m', 'epsilon', 'T_total']
TRAJECTORY_COLUMNS = ['t', 're_x', 'im_x', 're_y', 'im_y']


class ReportGenerator:
    """Writes result.json, stages.jsonl, scaling.csv and trajectory CSVs into one directory."""

    def __init__(self, output_dir: str = "./results"):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def _write_json(self, path: Path, payload: Dict[str, Any]) -> None:
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write("\n")

    def build_result(self, result: CountingResult, config: Optional[RunConfig] = None) -> Dict[str, Any]:
        payload = result.estimate.to_dict()
        payload.update({
            'alpha_true': float(result.alpha_true),
            'alpha_true_fraction': str(result.alpha_true),
            'error': float(result.error),
            'success': result.success,
            'mode': result.mode.value,
            'seed': result.seed,
            'ledger': result.ledger.to_dict(),
            'diagnostics': [d.to_dict() for d in result.diagnostics],
        })
        if config is not None:
            payload['config'] = {
                'instance': config.instance,
                'm': config.m,
                'mode': config.mode.value,
                'seed': config.seed,
                'c_omega': config.c_omega,
                'delta': config.delta,
                'failure_prob': config.failure_prob,
                'r0': config.r0,
                'r_slope': config.r_slope,
                'step': config.step,
            }
        return payload

    def generate_result_json(self, result: CountingResult, config: Optional[RunConfig] = None) -> str:
        path = self.output_dir / RESULT_FILE
        self._write_json(path, self.build_result(result, config))
        logger.info(f"Wrote {path}")
        return str(path)

    def generate_stages_jsonl(self, result: CountingResult) -> str:
        """One line per stage: {stage, eta, raw_phase, qX, qY, R}, then the final estimate."""
        path = self.output_dir / STAGES_FILE
        with open(path, 'w', encoding='utf-8') as f:
            for d in result.diagnostics:
                row = {
                    'stage': d.stage,
                    'eta': float(d.eta),
                    'raw_phase': d.raw_phase,
                    'qX': d.qX,
                    'qY': d.qY,
                    'R': d.R,
                }
                f.write(json.dumps(row, sort_keys=True) + "\n")
            final = {k: v for k, v in result.estimate.to_dict().items()
                     if k in ('alpha_hat', 'bits', 'm', 'epsilon')}
            f.write(json.dumps(final, sort_keys=True) + "\n")
        logger.info(f"Wrote {path}")
        return str(path)

    def scaling_frame(self, curve: ScalingCurve) -> pd.DataFrame:
        return pd.DataFrame(curve.points, columns=SCALING_COLUMNS)

    def generate_scaling_csv(self, curve: ScalingCurve) -> str:
        path = self.output_dir / SCALING_FILE
        self.scaling_frame(curve).to_csv(path, index=False, float_format='%.12g')
        logger.info(f"Wrote {path}")
        return str(path)

    def trajectory_frame(self, rows: Iterable[Tuple[float, complex, complex]]) -> pd.DataFrame:
        data = [(t, x.real, x.imag, y.real, y.imag) for t, x, y in rows]
        return pd.DataFrame(data, columns=TRAJECTORY_COLUMNS)

    def generate_trajectory_csv(self, rows: Iterable[Tuple[float, complex, complex]], name: str = "trajectory.csv") -> str:
        path = self.output_dir / name
        self.trajectory_frame(rows).to_csv(path, index=False, float_format='%.15g')
        logger.info(f"Wrote {path}")
        return str(path)
