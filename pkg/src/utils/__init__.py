#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
工具模块
"""
