#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""支持 python -m src.cli <命令> 的运行方式，退出码与main.py一致"""

import sys

from . import main

if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
