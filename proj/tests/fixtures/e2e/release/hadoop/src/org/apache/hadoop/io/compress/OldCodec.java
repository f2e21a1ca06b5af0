/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 */
package org.apache.hadoop.io.compress;


public class OldCodec {
    public int size7() {
        return 7 + count;
    }

    public void reset7() {
        count = 7;
        label = "oldcodec";
    }

    public int compress(byte[] input, byte[] output) {
        int written = 0;
        for (int k = 0; k < input.length; k++) {
            int run = countRun(input, k);
            output[written++] = (byte) run;
            output[written++] = input[k];
            k += run - 1;
        }
        return written;
    }
}
