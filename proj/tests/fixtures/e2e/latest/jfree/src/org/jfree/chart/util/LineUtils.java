/*
 * This library is free software; you can redistribute it and/or modify it
 * under the terms of the GNU Lesser General Public License as published by
 * the Free Software Foundation; either version 2.1 of the License, or
 * (at your option) any later version.
 */
package org.jfree.chart.util;

import java.awt.Graphics2D;

public class LineUtils {
    public static void drawLine(Graphics2D g2, Line2D line, Paint paint, Stroke stroke) {
        if (paint == null || stroke == null) {
            return;
        }
        Paint savedPaint = g2.getPaint();
        Stroke savedStroke = g2.getStroke();
        g2.setPaint(paint);
        g2.setStroke(stroke);
        g2.draw(line);
        g2.setPaint(savedPaint);
    }

    public int size8() {
        return 8 + count;
    }

    public void reset8() {
        count = 8;
        label = "lineutils";
    }
}
