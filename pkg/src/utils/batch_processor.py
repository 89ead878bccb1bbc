#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
批量处理模块 - 提供按样本并行、按提交顺序汇总结果的功能
"""

import time
from typing import Any, Callable, List, Optional, Sequence
from concurrent.futures import ThreadPoolExecutor

from .logger import logger


class BatchProcessor:
    """批量处理器类，提供确定性的多线程样本处理功能"""

    def __init__(self, max_workers: Optional[int] = 1):
        """
        初始化批量处理器

        Args:
            max_workers: 最大工作线程数，1表示在当前线程内顺序执行（逐位可复现的参考模式）
        """
        if max_workers is None or max_workers < 1:
            max_workers = 1
        self.max_workers = max_workers
        self.failed_items = []
        logger.debug(f"批量处理器初始化，最大工作线程数: {self.max_workers}")

    def map_ordered(self, process_func: Callable[[Any], Any], items: Sequence[Any],
                    process_name: str = "处理") -> List[Any]:
        """
        并行处理多个样本，结果按输入顺序返回

        Args:
            process_func: 处理函数，接收单个样本
            items: 样本序列
            process_name: 处理类型名称，用于日志记录

        Returns:
            List[Any]: 与items一一对应的结果列表

        Raises:
            Exception: 任一样本处理失败时抛出其中序号最小的那个异常
        """
        self.failed_items = []
        start_time = time.time()

        if self.max_workers == 1 or len(items) <= 1:
            results = [process_func(item) for item in items]
        else:
            with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
                futures = [executor.submit(process_func, item) for item in items]
                results = []
                first_error = None
                for index, future in enumerate(futures):
                    try:
                        results.append(future.result())
                    except Exception as e:
                        logger.error(f"{process_name}失败: 样本 {index}, 错误: {str(e)}")
                        self.failed_items.append((index, str(e)))
                        if first_error is None:
                            first_error = e
                        results.append(None)
                if first_error is not None:
                    raise first_error

        logger.debug(f"{process_name}完成: {len(items)} 个样本, 用时 {time.time() - start_time:.3f} 秒")
        return results
