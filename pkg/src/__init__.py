#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
师生MixIT半监督语音分离工具
"""

__version__ = "0.3.0"
__author__ = "Separation Toolkit Team"
