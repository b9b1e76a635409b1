"""
ADENet - joint active speaker detection and audio-visual speech enhancement
"""

__version__ = "0.1.0"
