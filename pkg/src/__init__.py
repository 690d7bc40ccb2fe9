"""
Pacote principal do gerador de microestrutura procedural de tecidos.
"""

__version__ = "1.0.0"
