#pragma once

#include <map>
#include <string>
#include <vector>

#include "cloneaudit/common.hpp"
#include "cloneaudit/license.hpp"
#include "cloneaudit/triage.hpp"

// Source texts shared by the unit tests and the acceptance run.
namespace testsupport {

// ---------------------------------------------------------------------------
// clone detection

/// Method of `body_lines + 4` lines.
inline std::string method_text(const std::string& name, int body_lines, const std::string& literal = "\"Hello\"") {
    std::string s = "public int " + name + "(int x) {\n";
    for (int i = 0; i < body_lines; ++i) s += "    x = x * " + std::to_string(i + 3) + " + " + std::to_string(i) + ";\n";
    s += "    log(" + literal + ");\n    return x;\n}\n";
    return s;
}

// ---------------------------------------------------------------------------
// licenses

inline std::string java_with_header(const std::string& header) {
    std::string out = "/*\n";
    for (const auto& l : cloneaudit::split_lines(header)) out += " * " + l + "\n";
    out += " */\npackage org.example;\n\npublic class A {\n}\n";
    return out;
}

/// Header text per license id, written the way projects usually phrase them.
inline const std::map<std::string, std::string>& license_headers() {
    static const std::map<std::string, std::string> h{
        {"Apache-2",
         "Licensed to the Apache Software Foundation (ASF).\n"
         "Licensed under the Apache License, Version 2.0 (the \"License\");\n"
         "you may not use this file except in compliance with the License."},
        {"EPLv1",
         "Copyright (c) 2004 IBM Corporation and others.\n"
         "All rights reserved. This program and the accompanying materials\n"
         "are made available under the terms of the Eclipse Public License v1.0\n"
         "which accompanies this distribution."},
        {"Proprietary", "Copyright (C) Example Corp. All rights reserved.\nProprietary and confidential."},
        {"SunMicrosystems",
         "Copyright 2006 Sun Microsystems, Inc. All rights reserved.\n"
         "Use is subject to license terms."},
        {"AGPLv3",
         "This program is free software: you can redistribute it and/or modify\n"
         "it under the terms of the GNU Affero General Public License as published by\n"
         "the Free Software Foundation, version 3 of the License."},
        {"AGPLv3+",
         "This program is free software: you can redistribute it and/or modify\n"
         "it under the terms of the GNU Affero General Public License as published by\n"
         "the Free Software Foundation, either version 3 of the License, or\n"
         "(at your option) any later version."},
        {"BSD3",
         "Copyright (c) 2010, Example.\n"
         "Redistribution and use in source and binary forms, with or without\n"
         "modification, are permitted provided that the following conditions are met.\n\n"
         "The name of the author may be used to endorse or promote products derived from this software\n"
         "only with prior written permission."},
        {"BSD2",
         "Redistribution and use in source and binary forms, with or without\n"
         "modification, are permitted provided that the following conditions are met.\n\n"
         "Redistributions in binary form must reproduce the above copyright notice."},
        {"CDDL",
         "The contents of this file are subject to the terms of the\n"
         "Common Development and Distribution License (the License)."},
        {"GPLv2",
         "This program is free software; you can redistribute it and/or modify it\n"
         "under the terms of the GNU General Public License version 2 only."},
        {"GPLv2+",
         "This program is free software; you can redistribute it and/or modify\n"
         "it under the terms of the GNU General Public License as published by\n"
         "the Free Software Foundation; either version 2 of the License, or\n"
         "(at your option) any later version."},
        {"GPLv3+",
         "This program is free software: you can redistribute it and/or modify\n"
         "it under the terms of the GNU General Public License as published by\n"
         "the Free Software Foundation, either version 3 of the License, or\n"
         "(at your option) any later version."},
        {"LesserGPLv2.1+",
         "This library is free software; you can redistribute it and/or modify it\n"
         "under the terms of the GNU Lesser General Public License as published by\n"
         "the Free Software Foundation; either version 2.1 of the License, or\n"
         "(at your option) any later version."},
        {"LesserGPLv3+",
         "This library is free software: you can redistribute it and/or modify it\n"
         "under the terms of the GNU Lesser General Public License as published by\n"
         "the Free Software Foundation, either version 3 of the License, or\n"
         "(at your option) any later version."},
        {"MPLv1.1",
         "The contents of this file are subject to the Mozilla Public License Version 1.1\n"
         "(the \"License\"); you may not use this file except in compliance with the License."},
        {"Oracle",
         "Copyright (c) 2012, Oracle and/or its affiliates. All rights reserved.\n"
         "Use is subject to license terms."},
        {"NewBSD3",
         "Copyright (c) 2013, Example. All rights reserved.\n"
         "Redistribution and use in source and binary forms, with or without\n"
         "modification, are permitted provided that the following conditions are met.\n\n"
         "Neither the name of the copyright holder nor the names of its contributors\n"
         "may be used to endorse or promote products derived from this software\n"
         "without specific prior written permission.\n\n"
         "THIS SOFTWARE IS PROVIDED BY THE COPYRIGHT HOLDERS AND CONTRIBUTORS \"AS IS\"."},
        {"CC-BY-SA-3.0", "Licensed under CC BY-SA 3.0."},
        {"Unknown", "Copyright (c) 2001 Some Author.\nAll rights reserved."},
    };
    return h;
}

/// Java file carrying the header of license `id`; "None" has no header.
inline std::string license_text_for(const std::string& id) {
    if (id == "None") return "package org.example;\n\npublic class A {\n}\n";
    return java_with_header(license_headers().at(id));
}

struct LicenseTableRow {
    std::string origin, snippet;
    cloneaudit::license::Verdict expected;
};

/// Origin side, snippet side, verdict; multi-license rows are expanded.
inline const std::vector<LicenseTableRow>& license_table() {
    using cloneaudit::license::Verdict;
    static const std::vector<LicenseTableRow> rows{
        {"Apache-2", "Apache-2", Verdict::Compatible},
        {"EPLv1", "EPLv1", Verdict::Compatible},
        {"Proprietary", "Proprietary", Verdict::Compatible},
        {"SunMicrosystems", "SunMicrosystems", Verdict::Compatible},
        {"None", "None", Verdict::Compatible},
        {"None", "CC-BY-SA-3.0", Verdict::Compatible},
        {"AGPLv3", "None", Verdict::Incompatible},
        {"AGPLv3+", "None", Verdict::Incompatible},
        {"Apache-2", "None", Verdict::Incompatible},
        {"BSD2", "None", Verdict::Incompatible},
        {"BSD3", "None", Verdict::Incompatible},
        {"CDDL", "None", Verdict::Incompatible},
        {"GPLv2", "None", Verdict::Incompatible},
        {"EPLv1", "None", Verdict::Incompatible},
        {"GPLv2+", "None", Verdict::Incompatible},
        {"GPLv3+", "None", Verdict::Incompatible},
        {"LesserGPLv2.1+", "None", Verdict::Incompatible},
        {"LesserGPLv3+", "None", Verdict::Incompatible},
        {"MPLv1.1", "None", Verdict::Incompatible},
        {"Oracle", "None", Verdict::Incompatible},
        {"Proprietary", "None", Verdict::Incompatible},
        {"SunMicrosystems", "None", Verdict::Incompatible},
        {"Unknown", "None", Verdict::Incompatible},
        {"LesserGPLv2.1+", "NewBSD3", Verdict::Incompatible},
    };
    return rows;
}

// ---------------------------------------------------------------------------
// outdated code

inline std::vector<std::string> trimmed_lines(const std::string& text) {
    std::vector<std::string> out;
    for (const auto& l : cloneaudit::split_lines(text)) out.push_back(cloneaudit::trim(l));
    return out;
}

inline const std::string kCompareOld = R"(public int compare(byte[] b1, int s1, int l1, byte[] b2, int s2, int l2) {
    try {
        buffer.reset(b1, s1, l1);
        key1.readFields(buffer);
        buffer.reset(b2, s2, l2);
        key2.readFields(buffer);
    } catch (IOException e) {
        throw new RuntimeException(e);
    }
    return compare(key1, key2);
})";

inline const std::string kCompareNew = R"(public int compare(byte[] b1, int s1, int l1, byte[] b2, int s2, int l2) {
    try {
        buffer.reset(b1, s1, l1);
        key1.readFields(buffer);
        buffer.reset(b2, s2, l2);
        key2.readFields(buffer);
        buffer.reset(null, 0, 0);
    } catch (IOException e) {
        throw new RuntimeException(e);
    }
    return compare(key1, key2);
})";

inline const std::string kHumanOld = R"(public static String humanReadableInt(long number) {
    long absNumber = Math.abs(number);
    double result = number;
    String suffix = "";
    if (absNumber < 1024) {
    } else if (absNumber < 1024 * 1024) {
        result = number / 1024.0;
        suffix = "k";
    } else if (absNumber < 1024 * 1024 * 1024) {
        result = number / (1024.0 * 1024);
        suffix = "m";
    } else {
        result = number / (1024.0 * 1024 * 1024);
        suffix = "g";
    }
    return oneDecimal.format(result) + suffix;
})";

inline const std::string kHumanNew = R"(public static String humanReadableInt(long number) {
    return TraditionalBinaryPrefix.long2String(number, "", 1);
})";

// ---------------------------------------------------------------------------
// evidence ranking

inline std::vector<cloneaudit::triage::EvidenceCandidate> hadoop_and_distractors() {
    return {
        {"hadoop:src/org/apache/hadoop/io/WritableComparator.java:15-26", "hadoop",
         "src/org/apache/hadoop/io/WritableComparator.java", {"WritableComparator", "compareBytes"}},
        {"lucene:src/org/apache/lucene/search/Sort.java:10-30", "lucene", "src/org/apache/lucene/search/Sort.java",
         {"Sort", "compare"}},
        {"hbase:src/org/apache/hbase/util/Bytes.java:1-20", "hbase", "src/org/apache/hbase/util/Bytes.java",
         {"Bytes", "compareTo"}},
        {"guava:src/com/google/common/primitives/UnsignedBytes.java:5-40", "guava",
         "src/com/google/common/primitives/UnsignedBytes.java", {"UnsignedBytes", "lexicographicalComparator"}},
        {"jfree:src/org/jfree/chart/util/LineUtils.java:12-22", "jfree", "src/org/jfree/chart/util/LineUtils.java",
         {"LineUtils", "clipLine"}},
        {"spring:src/org/springframework/util/ObjectUtils.java:3-9", "spring",
         "src/org/springframework/util/ObjectUtils.java", {"ObjectUtils", "nullSafeCompare"}},
    };
}

inline const char* kHadoopPost =
    "How do I implement a RawComparator in Hadoop? Hadoop's WritableComparator does this by "
    "deserializing both keys and calling compare on them.";

}  // namespace testsupport
