"""
設定ファイル読み込み機能のテスト
"""
import unittest
import os
import json
import math
import tempfile
from src.foliationgerms.config import DEFAULTS, Config, get_config, load_config


class TestConfig(unittest.TestCase):
    """
    設定ファイル読み込み機能のテストケース
    """

    def setUp(self):
        """
        テスト前の準備
        """
        # テスト用の設定ファイルを作成
        self.temp_dir = tempfile.TemporaryDirectory()
        self.config_path = os.path.join(self.temp_dir.name, 'test_settings.json')

        # テスト用の設定データ (一部のキーだけ上書き)
        self.config_data = {
            "trace": {
                "step_tol": 1e-7,
                "t_max": 50.0,
                "t_max_resonant": 20.0
            },
            "battery": {
                "seed": 42,
                "workers": 2
            }
        }

        # 設定ファイルを書き込む
        with open(self.config_path, 'w', encoding='utf-8') as f:
            json.dump(self.config_data, f, ensure_ascii=False, indent=4)

    def tearDown(self):
        """
        テスト後のクリーンアップ
        """
        # 一時ディレクトリを削除
        self.temp_dir.cleanup()
        load_config(None)

    def test_load_config(self):
        """
        設定ファイルの読み込みテスト
        """
        config = Config(self.config_path)

        # 設定データが正しく読み込まれているか確認
        self.assertEqual(config.get_step_tol(), 1e-7)
        self.assertEqual(config.get_t_max(), 50.0)
        self.assertEqual(config.get_t_max(resonant=True), 20.0)
        self.assertEqual(config.get_seed(), 42)
        self.assertEqual(config.get_workers(), 2)

    def test_defaults(self):
        """
        設定ファイルに無いキーは組み込みの既定値になるかのテスト
        """
        config = Config(self.config_path)

        self.assertEqual(config.get_tangency_tolerance(), 1e-9)
        self.assertEqual(config.get_close_distance(), 1e-6)
        self.assertEqual(config.get_axis_suspend(), 1e-6)
        self.assertEqual(config.get_min_crossings(), 100)
        self.assertAlmostEqual(config.get_max_arg_step(), math.pi / 4)
        self.assertEqual(config.get_max_denominator(), 1000000)
        self.assertEqual(config.get_rational_accept(), 1e-12)
        self.assertEqual(config.get_undecided_band(), 1e-9)
        self.assertEqual(config.get_battery_starts(), 10)

    def test_tolerances(self):
        """
        許容誤差の一覧がすべてのセクションを含むかのテスト
        """
        config = Config(self.config_path)
        tolerances = config.tolerances()

        self.assertEqual(set(tolerances), set(DEFAULTS))
        self.assertEqual(tolerances["trace"]["step_tol"], 1e-7)
        self.assertEqual(tolerances["battery"]["seed"], 42)

    def test_get_config_singleton(self):
        """
        シングルトンパターンのテスト
        """
        # 同じパスで取得した場合、同じインスタンスが返される
        config1 = get_config(self.config_path)
        config2 = get_config(self.config_path)
        self.assertIs(config1, config2)

    def test_load_config_replaces_singleton(self):
        """
        load_config でシングルトンが置き換わるかのテスト
        """
        config = load_config(self.config_path)
        self.assertIs(get_config(), config)
        self.assertEqual(get_config().get_seed(), 42)

    def test_file_not_found(self):
        """
        ファイルが見つからない場合のテスト
        """
        # 存在しないファイルパスを指定
        non_existent_path = os.path.join(self.temp_dir.name, 'non_existent.json')

        # FileNotFoundError が発生することを確認
        with self.assertRaises(FileNotFoundError):
            Config(non_existent_path)

    def test_invalid_json(self):
        """
        JSON が不正な場合のテスト
        """
        broken_path = os.path.join(self.temp_dir.name, 'broken.json')
        with open(broken_path, 'w', encoding='utf-8') as f:
            f.write('{"trace": ')

        with self.assertRaises(json.JSONDecodeError):
            Config(broken_path)


if __name__ == '__main__':
    unittest.main()
