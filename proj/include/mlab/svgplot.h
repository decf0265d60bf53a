#pragma once

#include <string>
#include <utility>
#include <vector>

namespace mlab {

/// Minimal self-contained SVG scatter/line plot used for the bifurcation
/// diagrams. Marker classes carry fixed colors and shapes so repeated runs
/// produce byte-identical output.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string x_label, std::string y_label);

    /// Registers a marker class; later add_marker calls refer to it by name.
    /// Shapes: "circle", "square", "diamond", "cross".
    void define_class(const std::string& name, const std::string& shape,
                      const std::string& color, double size);

    void add_marker(double x, double y, const std::string& class_name);
    void add_path(const std::vector<std::pair<double, double>>& points,
                  const std::string& color, bool dashed);

    /// Complete standalone SVG document.
    std::string render() const;

private:
    struct MarkerClass {
        std::string name, shape, color;
        double size = 4;
        bool used = false;
    };
    struct Marker {
        double x, y;
        std::size_t class_index;
    };
    struct Path {
        std::vector<std::pair<double, double>> points;
        std::string color;
        bool dashed;
    };

    std::string title_, x_label_, y_label_;
    std::vector<MarkerClass> classes_;
    std::vector<Marker> markers_;
    std::vector<Path> paths_;
};

}  // namespace mlab
