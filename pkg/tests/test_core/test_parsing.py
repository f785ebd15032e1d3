"""入力解析のテスト."""

import json

import pytest

from iwasawa.core.exceptions import InconsistentComplexError, ParseError
from iwasawa.core.parsing import (
    complex_from_json,
    complex_to_json,
    format_csv,
    load_json_file,
    module_from_json,
    module_to_json,
    modules_from_json,
    parse_n_list,
    parse_sigma,
)
from iwasawa.core.padic import make_coeff_ring


class TestArguments:
    """CLI 引数の解析のテスト."""

    def test_parse_sigma(self):
        """重複を除いて整列する."""
        assert parse_sigma("7,5,7") == [5, 7]
        assert parse_sigma("") == []

    def test_parse_n_list(self):
        """負の値も受け付ける."""
        assert parse_n_list("4,8,-4") == [4, 8, -4]

    def test_invalid_list(self):
        """数でない要素は ParseError."""
        with pytest.raises(ParseError):
            parse_n_list("4,x")


class TestModuleDescription:
    """加群の記述のテスト."""

    def setup_method(self):
        """テストメソッド実行前の準備."""
        self.ring = make_coeff_ring(5, 1, 12)

    def test_read_module(self):
        """十進文字列の係数を読む."""
        module = module_from_json({"mu": [1], "polys": [{"coeffs": ["-5", "1"], "mult": 2}]}, self.ring)
        assert module.mu == 1
        assert module.lambda_ == 2

    def test_roundtrip(self):
        """書き出した記述を読み直せる."""
        module = module_from_json({"polys": [{"coeffs": ["5", "0", "1"]}]}, self.ring, truncation=8)
        assert module_from_json(module_to_json(module), self.ring) == module

    def test_unknown_keys(self):
        """未知のキーは拒否."""
        with pytest.raises(ParseError):
            module_from_json({"mu": [1], "lambda": 3}, self.ring)

    def test_not_distinguished(self):
        """特殊多項式でなければ ParseError."""
        with pytest.raises(ParseError):
            module_from_json({"polys": [{"coeffs": ["1", "1"]}]}, self.ring)

    def test_list_of_modules(self):
        """{"modules": [...]} 形式."""
        modules = modules_from_json({"modules": [{"mu": [1]}, {"mu": [2]}]}, self.ring)
        assert [m.mu for m in modules] == [1, 2]


class TestComplexDescription:
    """複体の記述のテスト."""

    def setup_method(self):
        """テストメソッド実行前の準備."""
        self.ring = make_coeff_ring(5, 1, 12)

    def test_read_complex(self):
        """[Λ −T→ Λ] を読む."""
        complex_ = complex_from_json({"ranks": [1, 1], "diffs": [[[["0", "1"]]]]}, self.ring, 8)
        assert complex_.ranks == (1, 1)
        assert complex_to_json(complex_)["diffs"][0][0][0][:2] == ["0", "1"]

    def test_missing_ranks(self):
        """ranks がなければ ParseError."""
        with pytest.raises(ParseError):
            complex_from_json({"diffs": []}, self.ring)

    def test_inconsistent_complex(self):
        """d² ≠ 0 は InconsistentComplexError のまま伝える."""
        data = {"ranks": [1, 1, 1], "diffs": [[[["1"]]], [[["1"]]]]}
        with pytest.raises(InconsistentComplexError):
            complex_from_json(data, self.ring, 4)

    def test_too_many_coefficients(self):
        """打ち切り次数を超える係数は拒否."""
        with pytest.raises(ParseError):
            complex_from_json({"ranks": [1, 1], "diffs": [[[["0", "0", "1"]]]]}, self.ring, 2)


class TestFiles:
    """ファイル読み込みと CSV のテスト."""

    def test_load_json_file(self, tmp_path):
        """JSON ファイルを読む."""
        path = tmp_path / "module.json"
        path.write_text(json.dumps({"mu": [1]}), encoding="utf-8")
        assert load_json_file(path) == {"mu": [1]}

    def test_missing_file(self, tmp_path):
        """存在しないファイルは ParseError."""
        with pytest.raises(ParseError):
            load_json_file(tmp_path / "missing.json")

    def test_invalid_json(self, tmp_path):
        """壊れた JSON は ParseError."""
        path = tmp_path / "broken.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(ParseError):
            load_json_file(path)

    def test_format_csv(self):
        """ヘッダー付き, 欠けた列は空."""
        text = format_csv([{"n": 4, "degree": -9}], ["n", "degree", "group-label"])
        assert text == "n,degree,group-label\n4,-9,\n"
