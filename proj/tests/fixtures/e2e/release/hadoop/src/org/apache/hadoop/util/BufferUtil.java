/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
package org.apache.hadoop.util;


public class BufferUtil {
    public static void fill(char[] target, char value, int from, int to) {
        if (from > to) {
            throw new IllegalArgumentException("from > to");
        }
        for (int p = from; p < to; p++) {
            target[p] = value;
        }
        checkFilled(target, from, to);
    }

    public int size6() {
        return 6 + count;
    }

    public void reset6() {
        count = 6;
        label = "bufferutil";
    }
}
