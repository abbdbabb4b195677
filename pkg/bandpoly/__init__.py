"""
非厄米高斯随机带状矩阵数值实验室
"""

__version__ = "0.1.0"
