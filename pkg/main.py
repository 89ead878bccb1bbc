#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
教师-学生MixIT语音分离流水线主程序
"""

import sys

from src import __version__
from src.cli import main as cli_main


def main():
    """
    应用程序主入口函数
    """
    if len(sys.argv) > 1 and sys.argv[1] == "--version":
        print(f"ts_mixit v{__version__}")
        return 0
    return cli_main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
