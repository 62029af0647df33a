"""
設定ファイルを読み込むためのモジュール

数値判定に使う許容誤差や、球面トレースの既定値をまとめて管理する。
"""
import json
import logging
import math
import os
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)

# 設定ファイルが無い場合に使う既定値
DEFAULTS: Dict[str, Dict[str, Any]] = {
    "spectral": {
        "ray_tolerance": 1e-9,
        "cluster_tolerance": 1e-6,
        "max_dimension": 8,
    },
    "resonance": {
        "tolerance": 1e-8,
    },
    "normal_form": {
        "near_resonance": 1e-12,
        "coefficient_tolerance": 1e-10,
    },
    "rationality": {
        "max_denominator": 1_000_000,
        "accept": 1e-12,
        "undecided_band": 1e-9,
    },
    "trace": {
        "step_tol": 1e-9,
        "tangency": 1e-9,
        "t_max": 1e3,
        "t_max_resonant": 1e2,
        "close_distance": 1e-6,
        "close_angle": 1e-4,
        "axis_suspend": 1e-6,
        "min_crossings": 100,
        "max_arg_step": math.pi / 4,
    },
    "battery": {
        "seed": 0,
        "starts": 10,
        "axis_reject": 1e-3,
        "workers": 1,
    },
}


class Config:
    """
    設定ファイルを読み込み、アクセスするためのクラス
    """

    def __init__(self, config_path: str = None):
        """
        コンフィグを初期化する

        Args:
            config_path (str, optional): 設定ファイルのパス。指定しない場合はデフォルトのパスを使用する。
        """
        explicit = config_path is not None
        if config_path is None:
            # デフォルトのパスを使用
            base_dir = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
            config_path = os.path.join(base_dir, 'config', 'settings.json')

        self.config_path = config_path
        if explicit or os.path.exists(config_path):
            self.config_data = self._load_config()
        else:
            logger.debug(f"既定の設定ファイルが無いため組み込みの既定値を使います: {config_path}")
            self.config_data = {}

    def _load_config(self) -> Dict[str, Any]:
        """
        設定ファイルを読み込む

        Returns:
            Dict[str, Any]: 設定データ

        Raises:
            FileNotFoundError: 設定ファイルが見つからない場合
            json.JSONDecodeError: 設定ファイルのJSONが不正な場合
        """
        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                return json.load(f)
        except FileNotFoundError:
            raise FileNotFoundError(f"設定ファイルが見つかりません: {self.config_path}")
        except json.JSONDecodeError as e:
            raise json.JSONDecodeError(f"設定ファイルのJSONが不正です: {e.msg}", e.doc, e.pos)

    def get(self, section: str, key: str) -> Any:
        """
        セクションとキーを指定して設定値を取得する

        Args:
            section (str): セクション名 (例: "trace")
            key (str): キー名 (例: "step_tol")

        Returns:
            Any: 設定値。設定ファイルに無い場合は組み込みの既定値を返す。
        """
        section_data = self.config_data.get(section, {})
        return section_data.get(key, DEFAULTS[section][key])

    def get_ray_tolerance(self) -> float:
        """
        同一半直線判定に使う正規化外積の許容誤差を取得する

        Returns:
            float: 許容誤差
        """
        return float(self.get('spectral', 'ray_tolerance'))

    def get_cluster_tolerance(self) -> float:
        """
        数値固有値を重根としてまとめる相対許容誤差を取得する

        Returns:
            float: 相対許容誤差
        """
        return float(self.get('spectral', 'cluster_tolerance'))

    def get_max_dimension(self) -> int:
        return int(self.get('spectral', 'max_dimension'))

    def get_resonance_tolerance(self) -> float:
        """
        数値経路での共鳴判定の許容誤差を取得する

        Returns:
            float: |<m,λ> - λ_i| <= tol * (1 + |λ_i|) の tol
        """
        return float(self.get('resonance', 'tolerance'))

    def get_near_resonance(self) -> float:
        return float(self.get('normal_form', 'near_resonance'))

    def get_coefficient_tolerance(self) -> float:
        """
        数値経路で共鳴係数を「非零」とみなす閾値を取得する

        Returns:
            float: 閾値
        """
        return float(self.get('normal_form', 'coefficient_tolerance'))

    def get_max_denominator(self) -> int:
        return int(self.get('rationality', 'max_denominator'))

    def get_rational_accept(self) -> float:
        return float(self.get('rationality', 'accept'))

    def get_undecided_band(self) -> float:
        return float(self.get('rationality', 'undecided_band'))

    def get_step_tol(self) -> float:
        """
        積分の局所誤差許容値を取得する

        Returns:
            float: 局所誤差許容値
        """
        return float(self.get('trace', 'step_tol'))

    def get_tangency_tolerance(self) -> float:
        return float(self.get('trace', 'tangency'))

    def get_t_max(self, resonant: bool = False) -> float:
        """
        トレースの既定の長さを取得する

        Args:
            resonant (bool): 共鳴型のプロファイル用の値を取得する場合は True

        Returns:
            float: トレースの長さ
        """
        key = 't_max_resonant' if resonant else 't_max'
        return float(self.get('trace', key))

    def get_close_distance(self) -> float:
        return float(self.get('trace', 'close_distance'))

    def get_close_angle(self) -> float:
        return float(self.get('trace', 'close_angle'))

    def get_axis_suspend(self) -> float:
        return float(self.get('trace', 'axis_suspend'))

    def get_min_crossings(self) -> int:
        return int(self.get('trace', 'min_crossings'))

    def get_max_arg_step(self) -> float:
        return float(self.get('trace', 'max_arg_step'))

    def get_seed(self) -> int:
        return int(self.get('battery', 'seed'))

    def get_battery_starts(self) -> int:
        return int(self.get('battery', 'starts'))

    def get_axis_reject(self) -> float:
        return float(self.get('battery', 'axis_reject'))

    def get_workers(self) -> int:
        """
        バッテリー実行時の並列ワーカー数を取得する

        Returns:
            int: ワーカー数。1 の場合は逐次実行する。
        """
        return int(self.get('battery', 'workers'))

    def tolerances(self) -> Dict[str, Dict[str, Any]]:
        """
        判定に使われる許容誤差をすべて辞書で返す (出力の numerics 記録用)

        Returns:
            Dict[str, Dict[str, Any]]: セクションごとの設定値
        """
        return {section: {key: self.get(section, key) for key in keys}
                for section, keys in DEFAULTS.items()}


# シングルトンインスタンス
_config_instance = None


def get_config(config_path: str = None) -> Config:
    """
    設定インスタンスを取得する

    Args:
        config_path (str, optional): 設定ファイルのパス。指定しない場合はデフォルトのパスを使用する。

    Returns:
        Config: 設定インスタンス
    """
    global _config_instance
    if _config_instance is None:
        _config_instance = Config(config_path)
    return _config_instance


def load_config(config_path: Optional[str]) -> Config:
    """
    設定ファイルを読み直し、シングルトンを置き換える

    Args:
        config_path (Optional[str]): 設定ファイルのパス。None の場合はデフォルトのパス。

    Returns:
        Config: 新しい設定インスタンス
    """
    global _config_instance
    _config_instance = Config(config_path)
    return _config_instance
