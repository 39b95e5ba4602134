"""Mod-n K-theory engine: Bockstein data, the twisted group law on K^1(X; Z_n),
and finite counting for continuous fields of Cuntz algebras."""

__version__ = "0.1.0"
