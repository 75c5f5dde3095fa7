#include "fatmargin/matrix.hpp"

#include "fatmargin/error.hpp"

namespace fatmargin {

void Matrix::append_row(std::span<const double> values)
{
    if (rows_ == 0 && cols_ == 0)
        cols_ = values.size();
    if (values.size() != cols_)
        throw StructuralError("row length does not match matrix width");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

} // namespace fatmargin
